"""Smoke test for the uavf_py extension module.

Builds nothing itself: expects `cargo build -p uavf-py` to have produced
target/debug/libuavf_py.so. Copies it next to this script under the
importable name and exercises the bound API end to end.
"""

import json
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def ensure_module():
    for profile in ("debug", "release"):
        built = ROOT / "target" / profile / "libuavf_py.so"
        if built.exists():
            shutil.copy(built, HERE / "uavf_py.so")
            break
    else:
        sys.exit("libuavf_py.so not found; run `cargo build -p uavf-py` first")
    sys.path.insert(0, str(HERE))


def main():
    ensure_module()
    import uavf_py

    # parse + concrete execution
    prog = uavf_py.Program("fn main() { i32 b; b = input_byte(); assert(b != 90); return b; }")
    status, path_id, edges, steps = prog.run(bytes([7]))
    assert status == "completed:7", status
    assert steps > 0
    status, _, _, _ = prog.run(bytes([90]))
    assert status.startswith("fault:assert-violation"), status

    # bounded model checking finds the poison byte
    report = json.loads(prog.bmc_check(k=2))
    assert "False" in report["verdict"], report["verdict"]
    assert report["verdict"]["False"]["input"] == [90]

    magic = uavf_py.Program(
        "fn main() { i32 x; x = input(); if (x == 0x4D41474B) { assert(0); } return x; }"
    )

    # fuzzing summary: the guard's fall-through edge is coverable
    summary = json.loads(magic.fuzz(budget=5000, rng_seed=1))
    assert summary["edges_covered"] > 0

    # hybrid verification on the magic-guard program: fuzz gets stuck, the
    # BMC stage produces the model
    report = json.loads(magic.verify(budget=60000, rng_seed=7))
    assert "False" in report["verdict"], report["verdict"]
    assert bytes(report["verdict"]["False"]["input"]) == (0x4D41474B).to_bytes(4, "little")

    # GPS spoofing model
    p = uavf_py.gps_received_power(30.0, 620.0, 1575.42)
    assert abs(p - (-62.24)) < 0.01, p
    scenario = {
        "spoofer_pos": [620.0, 0.0, 0.0],
        "target_pos": [0.0, 0.0, 0.0],
        "satellite_distances": [],
        "tx_power_dbm": 30.0,
        "authentic_dbm": -130.0,
        "freq_mhz": 1575.42,
        "capture_margin_db": 3.0,
        "spoofed_coords": [48.0, 11.0, 500.0],
    }
    result = json.loads(uavf_py.gps_evaluate(json.dumps(scenario)))
    assert result["captured"] is True
    assert result["reported_position"] == [48.0, 11.0, 500.0]

    print("smoke test passed")


if __name__ == "__main__":
    main()
