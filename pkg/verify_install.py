#!/usr/bin/env python3
"""
Verification script to check the qwalk installation.
Run this after installing dependencies to verify everything works.
"""

import sys
import tempfile
from pathlib import Path

print("qwalk Installation Verification")
print("=" * 50)

# Check Python version
print("\n1. Checking Python version...")
if sys.version_info < (3, 9):
    print(f"   FAIL Python {sys.version_info.major}.{sys.version_info.minor} found")
    print("   Python 3.9+ required")
    sys.exit(1)
else:
    print(f"   OK   Python {sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}")

# Check dependencies
print("\n2. Checking dependencies...")
missing = []

deps = {
    "numpy": "NumPy",
    "scipy": "SciPy",
    "yaml": "PyYAML",
    "pydantic": "Pydantic",
    "pydantic_settings": "pydantic-settings",
    "matplotlib": "Matplotlib",
}

for module, name in deps.items():
    try:
        __import__(module)
        print(f"   OK   {name}")
    except ImportError:
        print(f"   FAIL {name} - NOT INSTALLED")
        missing.append(name)

if missing:
    print(f"\n   Missing dependencies: {', '.join(missing)}")
    print("   Run: pip install -r requirements.txt")
    sys.exit(1)

# Check qwalk modules
print("\n3. Checking qwalk modules...")
try:
    from qwalk import coin_walk, plane_wave, unmeasured_evolution, wave_packet, oracle, presets, export, config
    print("   OK   All modules importable")
except ImportError as e:
    print(f"   FAIL Import error: {e}")
    sys.exit(1)

# Test basic functionality
print("\n4. Testing basic functionality...")
failures = 0

try:
    from qwalk.coin_walk import CoinSpec, OperatorOrder, start_state, walk_evolve
    state = walk_evolve(start_state("R"), CoinSpec.hadamard(), OperatorOrder.COIN_THEN_SHIFT, 2)
    probabilities = dict(zip(state.positions.tolist(), state.probabilities.tolist()))
    assert abs(probabilities[-2.0] - 0.25) < 1e-14
    assert abs(probabilities[0.0] - 0.5) < 1e-14
    assert abs(probabilities[2.0] - 0.25) < 1e-14
    print("   OK   Hadamard walk (t = 2: 1/4, 1/2, 1/4)")
except Exception as e:
    print(f"   FAIL Hadamard walk: {e}")
    failures += 1

try:
    from qwalk.plane_wave import measured_step
    step = measured_step(1.0, 0.0, 0.0, 1.0, 0.01)
    assert abs(step.p_R - 1.0) < 1e-15 and abs(step.l1 + 0.01) < 1e-15
    print("   OK   Measured plane-wave step")
except Exception as e:
    print(f"   FAIL Measured plane-wave step: {e}")
    failures += 1

try:
    from qwalk.unmeasured_evolution import ModeEvolutionInput, evolve_mode_closed_form, evolve_mode_oracle
    data = ModeEvolutionInput(0.6, 0.8, k=1.3, l=0.1, theta=0.7, t=25)
    closed = evolve_mode_closed_form(data)
    brute = evolve_mode_oracle(data)
    assert abs(closed.phi_R - brute.phi_R) < 1e-10 and abs(closed.phi_L - brute.phi_L) < 1e-10
    print("   OK   Coherent closed form agrees with the matrix power")
except Exception as e:
    print(f"   FAIL Coherent closed form: {e}")
    failures += 1

try:
    from qwalk.cli import main
    with tempfile.TemporaryDirectory() as tmp:
        assert main(["figure", "1", "--presets", str(Path(__file__).parent / "presets" / "quick.yaml"),
                     "--out", tmp]) == 0
        assert (Path(tmp) / "fig1_scan.csv").exists()
    print("   OK   CLI writes figure 1 data")
except Exception as e:
    print(f"   FAIL CLI: {e}")
    failures += 1

# Summary
print("\n" + "=" * 50)
if failures:
    print(f"{failures} check(s) failed")
    sys.exit(1)
print("Installation verification complete!")
print("\nNext steps:")
print("1. Run: qwalk particle --steps 100")
print("2. Run: qwalk figure 3 --presets presets/quick.yaml --format svg")
print("3. Run the tests: pytest")
print("\nSee QUICKSTART.md for detailed instructions.")
