"""Regenerate the frozen E1 event trace used by the engine regression test.

Run after an intentional change to simulation semantics and commit the
resulting ``tests/fixtures/e1_trace.jsonl`` together with that change.
"""

import sys
from pathlib import Path

import yaml
from loguru import logger

from sefcsim.core.config import default_config
from sefcsim.simulation.engine import run_simulation

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> int:
    overrides = yaml.safe_load((FIXTURES / "e1_config.yaml").read_text(encoding="utf-8"))
    config = default_config(**overrides)
    target = FIXTURES / "e1_trace.jsonl"
    artifacts = run_simulation(config, trace_path=target)
    logger.info(
        "Froze {} ({} packets, {} handovers)",
        target,
        artifacts.packets_generated,
        len(artifacts.handover_log),
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
