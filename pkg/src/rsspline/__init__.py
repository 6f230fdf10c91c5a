"""RadixStringSpline learned index for sorted byte strings."""

from rsspline.hash_corrector import HashCorrector, build_hc, hc_memory_bytes, lookup_eq_hc
from rsspline.keyspace import (
    Dataset,
    DuplicateKey,
    EmptyDataset,
    ForbiddenByte,
    NotSorted,
    chunk_exhausted,
    extract_chunk,
    validate_dataset,
)
from rsspline.oracle import oracle_lookup_eq, oracle_lower_bound
from rsspline.rss import RssConfig, RssIndex, RssNode
from rsspline.spline import SplineModel, fit_spline, predict, radix_lookup

__all__ = [
    "Dataset", "DuplicateKey", "EmptyDataset", "ForbiddenByte", "NotSorted",
    "chunk_exhausted", "extract_chunk", "validate_dataset",
    "SplineModel", "fit_spline", "predict", "radix_lookup",
    "RssConfig", "RssIndex", "RssNode",
    "HashCorrector", "build_hc", "hc_memory_bytes", "lookup_eq_hc",
    "oracle_lookup_eq", "oracle_lower_bound",
]
