"""
collapse-sim launcher
Runs the command line from a source checkout
"""
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from cli.main import main


if __name__ == '__main__':
    sys.exit(main())
