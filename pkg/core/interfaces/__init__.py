"""
Interfaces (Ports)
Contracts for kernels, check suites and result storage.
"""
