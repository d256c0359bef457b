import os

# allow the thread-count reproducibility check to raise the worker count even
# on single-core machines; must happen before numba configures its threading
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import json
import time
from pathlib import Path

import pytest


class AcceptanceRuns:
    """Runs catalog scenarios once per session (optionally cached on disk via
    DCEMIRROR_ACCEPT_CACHE for repeated development runs) and hands tests the
    bundle directories plus measured wall times."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self._runtimes_path = self.root / "runtimes.json"
        self.runtimes: dict[str, float] = {}
        if self._runtimes_path.exists():
            self.runtimes = json.loads(self._runtimes_path.read_text())
        self._cache = None

    def _run_cache(self):
        from dcemirror.runner import RunCache

        if self._cache is None:
            self._cache = RunCache()
        return self._cache

    def bundle(self, name: str) -> Path:
        from dcemirror.runner import run_scenario
        from dcemirror.scenarios import get_scenario

        out = self.root / name
        manifest = out / f"{name}__manifest.json"
        if manifest.exists():
            return out
        scenario = get_scenario(name)
        t0 = time.perf_counter()
        run_scenario(scenario, out, config_source=f"builtin:{name}",
                     cache=self._run_cache())
        self.runtimes[name] = time.perf_counter() - t0
        self._runtimes_path.write_text(json.dumps(self.runtimes, indent=2, sort_keys=True))
        return out

    def runtime(self, name: str) -> float | None:
        return self.runtimes.get(name)


@pytest.fixture(scope="session")
def acceptance(tmp_path_factory) -> AcceptanceRuns:
    env = os.environ.get("DCEMIRROR_ACCEPT_CACHE")
    root = Path(env) if env else tmp_path_factory.mktemp("acceptance")
    return AcceptanceRuns(root)
