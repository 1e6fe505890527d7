"""Parameter accounting."""
from dataclasses import dataclass

from model.config import PUBLISHED_PARAM_COUNTS
from model.network import UMFFNet


@dataclass(frozen=True)
class LayerRow:
    """One layer of the summary table: its arrays' shapes and element count."""

    layer: str
    shapes: tuple[tuple[int, ...], ...]
    count: int


def count_params(model: UMFFNet) -> int:
    """Total number of trainable scalars."""
    return model.store.count()


def summary_rows(model: UMFFNet) -> list[LayerRow]:
    """Group parameter arrays by layer (name without the trailing ``.weight``/``.bias``)."""
    grouped: dict[str, list[tuple[int, ...]]] = {}
    counts: dict[str, int] = {}
    for name, tensor in model.store.items():
        layer = name.rsplit(".", 1)[0]
        grouped.setdefault(layer, []).append(tensor.shape)
        counts[layer] = counts.get(layer, 0) + tensor.size
    return [LayerRow(layer, tuple(shapes), counts[layer]) for layer, shapes in grouped.items()]


def summarize(model: UMFFNet) -> str:
    """
    Text table of layers, array shapes and parameter counts.

    The footer carries the total and, for named variants, the published
    count for comparison.
    """
    rows = summary_rows(model)
    width = max(len(row.layer) for row in rows)
    lines = [f"{'layer':<{width}}  {'shapes':<40}  {'params':>10}", "-" * (width + 54)]
    for row in rows:
        shapes = ", ".join("x".join(str(d) for d in shape) for shape in row.shapes)
        lines.append(f"{row.layer:<{width}}  {shapes:<40}  {row.count:>10,}")
    total = sum(row.count for row in rows)
    lines.append("-" * (width + 54))
    lines.append(f"{'total':<{width}}  {'':<40}  {total:>10,}")

    variant = model.config.variant
    if variant in PUBLISHED_PARAM_COUNTS:
        lines.append(f"variant {variant}: {total / 1e6:.2f}M measured, {PUBLISHED_PARAM_COUNTS[variant]:.2f}M published")
    return "\n".join(lines)
