"""
Test suite for collapse-sim
"""
