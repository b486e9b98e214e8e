"""Recognize and draw handwritten characters with recurrent networks."""

from ._core import (
    Classifier,
    Generator,
    ScrawlError,
    gen_tokens,
    line_features,
    normalize_coordinates,
    preprocess,
    quality_report,
    remove_redundant_points,
    render_svg,
    synthesize_corpus,
)

__all__ = [
    "Classifier",
    "Generator",
    "ScrawlError",
    "gen_tokens",
    "line_features",
    "normalize_coordinates",
    "preprocess",
    "quality_report",
    "remove_redundant_points",
    "render_svg",
    "synthesize_corpus",
]
