"""Write the datum and point-cloud files used by the CLI walkthrough in the README."""
import json
from pathlib import Path

from blbounds import catalog
from blbounds.cli import datum_document
from blbounds.visual import grid_cloud, write_cloud

OUT = Path(__file__).parent / "data"


def main():
    OUT.mkdir(exist_ok=True)
    files = {
        "young.json": datum_document(catalog.young()),
        "loomis_whitney.json": datum_document(catalog.loomis_whitney(), alphas=0.5),
        "d_lambda_0.25.json": datum_document(catalog.d_lambda(0.25), alphas=0.577),
        "lw_pair.json": datum_document(catalog.loomis_whitney_pair(), alphas=0.5, beta=1.0),
        "coordinate_lines.json": datum_document(catalog.coordinate_lines(2), alphas=0.5),
    }
    for name, doc in files.items():
        (OUT / name).write_text(json.dumps(doc, indent=1) + "\n")
    write_cloud(grid_cloud(64, 2), OUT / "grid64.txt")
    print(f"wrote {len(files) + 1} files to {OUT}")


if __name__ == "__main__":
    main()
