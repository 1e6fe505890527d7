"""Content, frequency and uncertainty losses."""
from losses.objective import LossReport, LossWeights, content_loss, frequency_loss, total_loss

__all__ = ["LossWeights", "LossReport", "content_loss", "frequency_loss", "total_loss"]
