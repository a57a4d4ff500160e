"""
Domain Entities
Grids, spinor fields, potentials, scenarios and ensemble records.
"""
