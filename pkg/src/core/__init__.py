"""
Core modules for configuration, logging, and exceptions
"""
