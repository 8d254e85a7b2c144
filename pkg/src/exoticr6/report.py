"""Verification reports: assembly, serialization and exit codes."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .certify import dump_certificate
from .checks import CHECK_IDS, FAIL, INCONCLUSIVE, PASS, CheckConfig, run_check
from .forms import ORIENTATION

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2
TIMING_KEYS = frozenset({"wall_time_ms"})


@dataclass
class VerificationReport:
    header: dict
    checks: list = field(default_factory=list)

    @property
    def overall(self) -> str:
        statuses = [c["status"] for c in self.checks]
        if any(s == FAIL for s in statuses):
            return FAIL
        if any(s == INCONCLUSIVE for s in statuses):
            return INCONCLUSIVE
        return PASS

    @property
    def exit_code(self) -> int:
        return {PASS: EXIT_PASS, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}[self.overall]

    def to_dict(self) -> dict:
        return {
            "header": self.header,
            "overall_status": self.overall,
            "checks": [{k: v for k, v in c.items() if not k.startswith("_")} for c in self.checks],
        }


def run_pipeline(check_ids, cfg: CheckConfig, concurrent: bool = False) -> VerificationReport:
    ids = list(CHECK_IDS) if check_ids in ("all", ["all"]) else list(check_ids)
    header = {
        "tool": "exoticr6",
        "tool_version": __version__,
        "hodge_orientation": ORIENTATION,
        "metric": "euclidean",
        "config": cfg.echo(),
        "checks_requested": ids,
    }
    if concurrent and len(ids) > 1:
        with ThreadPoolExecutor(max_workers=len(ids)) as pool:
            records = list(pool.map(lambda i: run_check(i, cfg), ids))
    else:
        records = [run_check(i, cfg) for i in ids]
    return VerificationReport(header=header, checks=records)


def strip_timing(data):
    """Drop timing fields recursively; what remains must be identical across reruns."""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k not in TIMING_KEYS}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data


def emit_report(report: VerificationReport, fmt: str = "structured") -> str:
    if fmt == "structured":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        f"exoticr6 {__version__}  orientation {ORIENTATION}",
        "config: " + ", ".join(f"{k}={v}" for k, v in report.header["config"].items()),
        "",
    ]
    for c in report.checks:
        bound = c["certified_lower_bound"]
        extra = f"  bound>={bound['decimal']}" if bound else ""
        if c["boxes_processed"]:
            extra += f"  boxes={c['boxes_processed']} depth={c['depth']}"
        lines.append(f"[{c['status'].upper():>12}] {c['check_id']:<18} {c['claim']}{extra}  ({c['wall_time_ms']} ms)")
        if c["check_id"] == "reduction":
            rel = c["discovered_constants"]["chi_y0_vs_stated_polynomials"]
            lines.append(f"{'':16}relation: {rel['kind']}"
                         + (f" (constant {rel['constant']})" if rel["constant"] else ""))
        probe = c["discovered_constants"].get("common_zero_probe")
        if probe and probe["findings"]:
            f = probe["findings"][0]
            lines.append(f"{'':16}common zero on {f['line']}, t in [{f['t_bracket_decimal'][0]:.15f}, "
                         f"{f['t_bracket_decimal'][1]:.15f}] (root of {f['gcd']})")
    lines += ["", f"overall: {report.overall}"]
    return "\n".join(lines) + "\n"


def write_outputs(report: VerificationReport, text: str, out: Path) -> list[Path]:
    """Write the report and one certificate file per branch-and-bound run next to it."""
    out = Path(out)
    out.write_text(text, encoding="utf-8")
    written = [out]
    stem = out.name.rsplit(".", 1)[0]
    for c in report.checks:
        for label, res in c.get("_certificates", []):
            path = out.with_name(f"{stem}.{label}.cert.jsonl")
            dump_certificate(res, path)
            written.append(path)
    return written
