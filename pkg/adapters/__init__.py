"""
Adapters Layer
Kernels, verification suites and run-directory storage behind the core interfaces.
"""
