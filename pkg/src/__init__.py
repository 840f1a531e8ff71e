"""
Collapse Sim - Main Package
"""
