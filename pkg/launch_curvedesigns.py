#!/usr/bin/env python
"""
CURVE-DESIGNS Launcher
Runs the full reproduction sweep and collects every artifact under proofs/
"""

import argparse
import asyncio
import sys
import time
from datetime import datetime
from pathlib import Path

from curvedesigns.settings import load_config

EXIT_LABELS = {0: "[OK]", 1: "[FAIL]", 2: "[USAGE]", 3: "[INCONCLUSIVE]"}


class CurveDesignsLauncher:
    def __init__(self, out_dir: str = "proofs", max_n: int = 11, config_path: str = None):
        self.out_dir = Path(out_dir)
        self.max_n = max_n
        self.config_path = config_path
        self.config = load_config(config_path)
        self.results = {}

    def steps(self):
        """(name, argv) for each artifact"""
        group_max_n = self.config['guards']['group_max_n']
        steps = [
            ("report", ["report", "--n", f"2..{self.max_n}", "--format", "csv"]),
            ("report_aut", ["report", "--n", f"2..{group_max_n}", "--with-aut", "--format", "csv"]),
        ]
        for n in range(2, group_max_n + 1):
            for kind in ("parabola", "hyperbola"):
                steps.append((f"aut_n{n}_{kind}", ["aut", "--n", str(n), "--kind", kind]))
        for n in range(2, 5):
            for kind in ("parabola", "hyperbola"):
                steps.append((f"blocks_n{n}_{kind}", ["build", "--n", str(n), "--kind", kind]))
        return steps

    async def run_step(self, name: str, argv: list):
        suffix = ".csv" if "csv" in argv else ".json" if argv[0] == "aut" else ".txt"
        out = self.out_dir / f"{name}{suffix}"
        cmd = [sys.executable, "-m", "curvedesigns", *argv, "--out", str(out)]
        if self.config_path:
            cmd += ["--config", self.config_path]
        start = time.time()
        proc = await asyncio.create_subprocess_exec(*cmd)
        code = await proc.wait()
        self.results[name] = (code, time.time() - start, out)
        print(f"{EXIT_LABELS.get(code, '[FAIL]')} {name} ({time.time() - start:.1f}s) -> {out}")

    def show_status(self):
        print("\n" + "=" * 60)
        print("CURVE-DESIGNS REPRODUCTION STATUS")
        print("=" * 60)
        print(f"Time: {datetime.now():%Y-%m-%d %H:%M:%S}")
        print(f"Artifacts: ./{self.out_dir}/")
        for name, (code, elapsed, _) in sorted(self.results.items()):
            print(f"  {EXIT_LABELS.get(code, '[FAIL]')} {name}: exit {code} in {elapsed:.1f}s")
        print("=" * 60 + "\n")

    async def launch_all(self, parallel: int = 2):
        self.out_dir.mkdir(exist_ok=True, parents=True)
        semaphore = asyncio.Semaphore(max(1, parallel))

        async def bounded(name, argv):
            async with semaphore:
                await self.run_step(name, argv)

        await asyncio.gather(*(bounded(name, argv) for name, argv in self.steps()))
        self.show_status()
        codes = {code for code, _, _ in self.results.values()}
        if codes & {1, 2}:
            return 1
        return 3 if 3 in codes else 0


def main():
    parser = argparse.ArgumentParser(description='Run every CURVE-DESIGNS check and store the outputs')
    parser.add_argument('--out-dir', default='proofs')
    parser.add_argument('--max-n', type=int, default=11, help='Largest n in the design report')
    parser.add_argument('--parallel', type=int, default=2)
    parser.add_argument('--config')
    args = parser.parse_args()

    launcher = CurveDesignsLauncher(args.out_dir, args.max_n, args.config)
    try:
        sys.exit(asyncio.run(launcher.launch_all(args.parallel)))
    except KeyboardInterrupt:
        print("\n[SHUTDOWN] Interrupted")
        sys.exit(130)


if __name__ == "__main__":
    main()
