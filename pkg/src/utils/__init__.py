"""
Utility modules for closed-form Gaussian algebra
"""
