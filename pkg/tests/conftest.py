import os
from pathlib import Path

# keep the columnar engine single-threaded before it is ever imported, so
# throughput measurements are per-core
os.environ.setdefault("POLARS_MAX_THREADS", "1")

DATA_DIR = Path(__file__).parent / "data"
