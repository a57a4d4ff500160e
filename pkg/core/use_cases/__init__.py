"""
Use Cases
Dirac operator, eigenbasis, expectations, action minimization and the t_i ensemble.
"""
