"""
Configuration
Settings from the environment and strict scenario/ensemble loaders.
"""
