"""
Collapse race: diagram series, Monte Carlo process, two-particle variant, magnitudes
"""
