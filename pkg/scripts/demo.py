"""Run every CLI command on the shipped fixtures and collect the outputs in one directory.

Usage: python scripts/demo.py [OUTDIR]   (default: ./demo_out)
"""
import io
import sys
from pathlib import Path

from planar_abpe.cli import main

ROOT = Path(__file__).resolve().parent.parent
FX = ROOT / "fixtures"


def run(out: Path, name: str, *argv) -> int:
    buf, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=buf, stderr=err)
    (out / f"{name}.stdout").write_text(buf.getvalue())
    print(f"{name:<12} exit {code}  {err.getvalue().strip()}")
    return code


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
    out.mkdir(parents=True, exist_ok=True)
    run(out, "cauchy", "cauchy", "--scene", FX / "unit_circle.scene", "--points", FX / "points.csv")
    run(out, "color-zero", "color", "--scene", FX / "phi_zero.scene", "--a", "0", "--k", "1",
        "--gens", "3", "--out", out / "color_zero.svg", "--report", out / "color_zero.json")
    run(out, "color-heavy", "color", "--scene", FX / "phi_heavy.scene", "--a", "0", "--k", "1",
        "--gens", "2", "--out", out / "color_heavy.svg", "--report", out / "color_heavy.json")
    run(out, "classify", "classify", "--scene", FX / "unit_circle.scene", "--points", FX / "points.csv",
        "--k-max", "5")
    run(out, "abpe-scan", "abpe-scan", "--scene", FX / "unit_disk_area.scene", "--res", "0.03125",
        "--out", out / "scan_disk.svg", "--report", out / "scan_disk.json")
    run(out, "sweep", "sweep", "--scene", FX / "annulus.scene", "--domain", "annulus",
        "--inner", "0.5", "--outer", "1", "--n", "256", "--report", out / "sweep.json")
    run(out, "decompose", "decompose", "--scene", FX / "two_disks_segment.scene",
        "--report", out / "decompose.json")
    print(f"outputs in {out}")
