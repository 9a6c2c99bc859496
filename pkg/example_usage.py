"""
Example script showing how forge.py, classify.py and instance_io.py fit together
"""

import sys
from pathlib import Path
from typing import Dict

from classify import classify, hints_from_forged
from forge import (gen_exact_rlt, gen_exact_sdprlt, gen_exact_sdprlt_inexact_rlt,
                   gen_inexact_rlt, gen_inexact_sdprlt_family)
from instance_io import load_instance, save_instance
from qp_types import ForgeSpec


def run_examples(output_dir: str = "./forged_instances", seed: int = 7) -> Dict[str, str]:
    """
    Forge one instance of every kind, write it to disk, read it back and classify it:
    1. Generate instances with known exactness
    2. Save them as boxqp-forge/1 JSON
    3. Reload and label each one E1-E4 (or PARTIAL)
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = ForgeSpec(seed=seed)

    # Step 1: Generate instances
    print("Generating instances...")
    forged = {
        "exact-rlt": gen_exact_rlt(4, L=[0, 2], spec=spec),
        "inexact-rlt": gen_inexact_rlt(4, B=[1], L=[0], spec=spec),
        "exact-sdprlt": gen_exact_sdprlt(3, [0.0, 0.4, 1.0], spec),
        "exact-sdprlt-inexact-rlt": gen_exact_sdprlt_inexact_rlt(3, [0.3, 0.5, 1.0], spec),
        "inexact-sdprlt-family": gen_inexact_sdprlt_family(3),
    }

    # Step 2 and 3: Save, reload, classify
    labels = {}
    for name, instance in forged.items():
        path = out / f"{name}.json"
        save_instance(path, instance)
        inst, metadata = load_instance(path)
        report = classify(inst, hints_from_forged(metadata))
        labels[name] = report.label.value
        print(f"- {name}: {report.label.value} ({report.detail})")

    print(f"\nInstances written to {out}")
    return labels


if __name__ == "__main__":
    run_examples(*sys.argv[1:2])
