#!/usr/bin/env python3
"""Run the building_escape scenario against an in-process service stack and
print the run log plus a short summary.

Usage: python3 scripts/run_building_escape.py [seed]
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, "src")

REPO = Path(__file__).resolve().parents[1]


def main():
    from fastapi.testclient import TestClient

    from hivemind.services import create_app
    from hivemind.simulator import render_log, run_scenario
    from hivemind.store import Store

    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    scenario = json.loads((REPO / "scenarios" / "building_escape.json").read_text())
    client = TestClient(create_app(Store(None)))
    result = run_scenario(client, scenario, base_dir=REPO, seed=seed)
    print(render_log(result["log"]), end="")
    end = result["log"][-1]
    print(f"# status={result['status']} ticks={result['ticks']} "
          f"door_distance={end['distances'].get('door')}", file=sys.stderr)
    sys.exit(0 if result["status"] == "done" else 1)


if __name__ == "__main__":
    main()
