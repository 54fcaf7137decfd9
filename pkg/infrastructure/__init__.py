"""
Infrastructure Layer - Cache e storage delle tabelle precomputate
"""

from .table_cache import TableCache, nbytes_of

__all__ = ['TableCache', 'nbytes_of']
