"""Machine- and human-readable run reports with a stable JSON schema.

Reports are deterministic: given the same inputs and seed the JSON rendering
is byte-identical.  Wall-clock timings are therefore excluded from the JSON
unless explicitly requested; the human rendering always shows them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

SCHEMA_VERSION = 1

PASS = "PASS"
FAIL = "FAIL"
WARN = "WARN"
INFO = "INFO"


@dataclass
class Check:
    name: str
    status: str               # PASS | FAIL | WARN | INFO
    verdict: str = ""         # PROVEN_ZERO / LIKELY_NONZERO / value+tolerance...
    detail: str = ""
    data: dict = field(default_factory=dict)


@dataclass
class RunReport:
    command: str
    seed: Optional[int] = None
    inputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    timings_ms: Optional[dict] = None

    def add(self, name: str, status: str, verdict: str = "", detail: str = "",
            **data) -> Check:
        c = Check(name, status, verdict, detail, data)
        self.checks.append(c)
        return c

    @property
    def n_failed(self) -> int:
        return sum(1 for c in self.checks if c.status == FAIL)

    @property
    def n_warned(self) -> int:
        return sum(1 for c in self.checks if c.status == WARN)

    @property
    def exit_code(self) -> int:
        return 1 if self.n_failed else 0

    def to_dict(self, include_timings: bool = False) -> dict:
        from . import __version__
        d = {
            "schema": SCHEMA_VERSION,
            "tool": "spherewave",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "inputs": self.inputs,
            "summary": {
                "checks": len(self.checks),
                "failed": self.n_failed,
                "warned": self.n_warned,
                "exit_code": self.exit_code,
            },
            "checks": [
                {"name": c.name, "status": c.status, "verdict": c.verdict,
                 "detail": c.detail, "data": c.data}
                for c in self.checks
            ],
        }
        if include_timings and self.timings_ms is not None:
            d["timings_ms"] = self.timings_ms
        return d

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2,
                          sort_keys=True, default=str) + "\n"

    def render_text(self) -> str:
        lines = [f"spherewave {self.command}"
                 + (f" (seed {self.seed})" if self.seed is not None else "")]
        for c in self.checks:
            head = f"  [{c.status:4s}] {c.name}"
            if c.verdict:
                head += f": {c.verdict}"
            lines.append(head)
            if c.detail:
                for dl in c.detail.splitlines():
                    lines.append(f"         {dl}")
        lines.append(f"  -- {len(self.checks)} checks, {self.n_failed} failed, "
                     f"{self.n_warned} warnings")
        if self.timings_ms:
            total = sum(self.timings_ms.values())
            lines.append(f"  -- elapsed {total:.0f} ms")
        return "\n".join(lines) + "\n"
