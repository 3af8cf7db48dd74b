"""Running catalogued identities from Python rather than the command line."""

from coascent.harness import CATALOG, ExperimentConfig, run

for name, info in CATALOG.items():
    print(f"{name:<22} {info.claim}")

for identity in ("intensity", "persistence", "idempotence"):
    result = run(ExperimentConfig(identity, ensemble_size=1000, steps=1024))
    print()
    print("\n".join(result.report.summary_lines()))
