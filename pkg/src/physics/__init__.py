"""
Physics modules: Minkowski geometry, Gaussian wavefunctions, Goursat solver
"""
