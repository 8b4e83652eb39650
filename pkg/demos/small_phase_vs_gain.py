"""Two feedback loops where exactly one of the small-phase and small-gain tests succeeds."""

from pathlib import Path

from tensorphase.control import small_phase_check
from tensorphase.io import read_system

FIX = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

for name in ("phase_pass_gain_fail", "gain_pass_phase_fail"):
    G = read_system(FIX / f"{name}_G.json")
    H = read_system(FIX / f"{name}_H.json")
    rep = small_phase_check(G, H, with_oracle=True, with_gain=True)
    print(f"{name}:")
    print(f"  small phase {rep.small_phase:5s}  small gain {rep.small_gain:5s}  closed loop {rep.oracle}")
    print(f"  ||G||inf = {rep.hinf_g:.4f}  ||H||inf = {rep.hinf_h:.4f}")
