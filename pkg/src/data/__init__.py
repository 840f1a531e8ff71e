"""
Data modules for validating and exporting run artifacts
"""
