"""The MNIST experiment, desk-scale by default.

Needs the four MNIST IDX files (uncompressed) in a directory pointed to by
CSNET_MNIST_DIR (default: ./data/mnist). The pooled 70000 samples are
shuffled into 50000 training / 12000 test images; pass --full to run at that
scale with the headline configuration (takes a while), otherwise a 5000/1000
subset with 4+4 filters runs in a couple of minutes.

Run:  python demos/04_mnist_experiment.py [--full] [--noise 0.1]
"""

import argparse
import os
import sys
from pathlib import Path

from csnet import ExperimentConfig, evaluate_model, train_model

parser = argparse.ArgumentParser()
parser.add_argument("--full", action="store_true", help="headline-scale run")
parser.add_argument("--noise", type=float, default=0.0, help="pixel-noise variance")
args = parser.parse_args()

root = Path(os.environ.get("CSNET_MNIST_DIR", "data/mnist"))
names = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}
paths = {k: root / v for k, v in names.items()}
missing = [str(p) for p in paths.values() if not p.exists()]
if missing:
    print("MNIST IDX files not found:")
    for p in missing:
        print("  ", p)
    print("download the dataset and point CSNET_MNIST_DIR at it.")
    sys.exit(1)

config = ExperimentConfig(
    split_mode="pooled",
    noise_variance=args.noise,
    train_images=str(paths["train_images"]),
    train_labels=str(paths["train_labels"]),
    test_images=str(paths["test_images"]),
    test_labels=str(paths["test_labels"]),
    **({} if args.full else dict(stage_widths=(4, 4), train_limit=5000, test_limit=1000)),
)

scale = "full 50000/12000" if args.full else "subset 5000/1000"
print(f"=== {scale}, widths {config.stage_widths}, noise {args.noise} ===")
for method in ("cs", "pca", "random"):
    model, metrics = train_model(config.replace(method=method))
    result, _ = evaluate_model(model, on="test")
    print(
        f"{method:6s}  train error {metrics['train_error']:.4f}   "
        f"test error {result.error_rate:.4f}   "
        f"({sum(metrics['phase_seconds'].values()):.0f}s)"
    )
