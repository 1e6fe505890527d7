"""Command-line surface: synth, train, infer, eval, inspect."""
import os

# Single BLAS thread; must be set before numpy is first imported
for _variable in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_variable, "1")

from cli.commands import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, UsageError, build_parser, main  # noqa: E402
from cli.umap import read_umap, write_umap  # noqa: E402

__all__ = ["main", "build_parser", "UsageError", "EXIT_OK", "EXIT_USAGE", "EXIT_RUNTIME", "read_umap", "write_umap"]
