"""
Infrastructure Layer
Environment settings and scenario file parsing.
"""
