"""
Storage Adapters
Run-directory persistence and the four-point weight cache.
"""

from .file_result_repository import FileResultRepository
from .weight_table_cache import WeightTableCache

__all__ = ["FileResultRepository", "WeightTableCache"]
