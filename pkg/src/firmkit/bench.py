"""Per-file optimize + isel runs with timing and memory figures."""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .gxl import GxlError, parse_gxl
from .isel import select
from .opt import OptConfig, VerificationError, optimize
from .verify import errors, verify

try:
    import resource
except ImportError:  # not available on Windows
    resource = None


def peak_rss_bytes() -> Optional[int]:
    """Peak resident set size of this process, or None if unavailable."""
    if resource is None:
        return None
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # kilobytes on Linux, bytes on macOS
    return peak if sys.platform == "darwin" else peak * 1024


@dataclass
class BenchRecord:
    file: str
    ok: bool = False
    error: Optional[str] = None
    verified: Optional[bool] = None
    nodes_before: Optional[int] = None
    nodes_after: Optional[int] = None
    edges_before: Optional[int] = None
    edges_after: Optional[int] = None
    phases: list[dict] = field(default_factory=list)
    peak_rss_bytes: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def wall_ms(self) -> float:
        return sum(p["wall_ms"] for p in self.phases)


def bench_file(path: str, config: Optional[OptConfig] = None, parallel: bool = True) -> BenchRecord:
    record = BenchRecord(file=Path(path).name)
    try:
        graph = parse_gxl(Path(path).read_bytes())
    except (OSError, GxlError) as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        return record
    record.nodes_before, record.edges_before = len(graph.nodes), len(graph.edges)
    try:
        opt_report = optimize(graph, config)
        record.phases.append(opt_report.to_dict())
        isel_report = select(graph, parallel=parallel)
        record.phases.append(isel_report.to_dict())
    except VerificationError as exc:
        record.verified = False
        record.error = str(exc)
        return record
    except Exception as exc:  # noqa: BLE001 - one bad file must not abort the corpus
        record.error = f"{type(exc).__name__}: {exc}"
        return record
    record.verified = not errors(verify(graph))
    record.nodes_after, record.edges_after = len(graph.nodes), len(graph.edges)
    record.ok = record.verified
    if not record.verified:
        record.error = "result does not verify"
    record.peak_rss_bytes = peak_rss_bytes()
    return record


def bench_dir(directory: str, jobs: int = 1, config: Optional[OptConfig] = None) -> list[BenchRecord]:
    files = sorted(str(p) for p in Path(directory).glob("*.gxl"))
    if jobs <= 1:
        return [bench_file(f, config) for f in files]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(bench_file, files, [config] * len(files)))
