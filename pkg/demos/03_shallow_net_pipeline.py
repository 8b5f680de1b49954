"""The whole pipeline on a small synthetic classification problem.

Three image classes (a bright block in a class-specific quadrant), run end
to end: filter learning -> two-stage cascade -> binarize/hash/histogram ->
linear SVM. Then the same data with increasing pixel noise, to show the
noise-robustness experiment machinery without needing any dataset files.

Run:  python demos/03_shallow_net_pipeline.py
"""

import tempfile
from pathlib import Path

import numpy as np

from csnet import (
    ExperimentConfig,
    LabeledSet,
    evaluate_model,
    load_model,
    save_model,
    train_model,
    write_idx,
)


def blob_set(n_per_class, seed, size=28):
    rng = np.random.default_rng(seed)
    centers = [(7, 7), (7, 21), (21, 7)]
    images, labels = [], []
    for label, (ci, cj) in enumerate(centers):
        for _ in range(n_per_class):
            img = rng.random((size, size)) * 0.15
            di, dj = rng.integers(-2, 3, size=2)
            img[ci - 4 + di : ci + 4 + di, cj - 4 + dj : cj + 4 + dj] += 0.8
            images.append(np.clip(img, 0, 1))
            labels.append(label)
    order = rng.permutation(len(images))
    return LabeledSet(np.array(images)[order], np.array(labels)[order])


work = Path(tempfile.mkdtemp(prefix="csnet-demo-"))
write_idx(blob_set(40, seed=1), work / "train-i.idx", work / "train-l.idx")
write_idx(blob_set(15, seed=2), work / "test-i.idx", work / "test-l.idx")
print(f"wrote toy IDX files under {work}")

config = ExperimentConfig(
    stage_widths=(4, 4),
    split_mode="files",
    train_images=str(work / "train-i.idx"),
    train_labels=str(work / "train-l.idx"),
    test_images=str(work / "test-i.idx"),
    test_labels=str(work / "test-l.idx"),
)

print("\n=== train ===")
model, metrics = train_model(config)
print(f"feature dimension: {metrics['feature_dim']} "
      f"(2^4 bins x 4 groups x 16 blocks)")
print(f"training error: {metrics['train_error']:.3f}")
print("phase seconds:", metrics["phase_seconds"])

print("\n=== evaluate ===")
result, _ = evaluate_model(model, on="test")
print(f"test error: {result.error_rate:.3f}")
print("confusion matrix (rows = true class):")
print(result.confusion)

print("\n=== model file round trip ===")
save_model(model, work / "demo.model")
reloaded = load_model(work / "demo.model")
again, _ = evaluate_model(reloaded, on="test")
print(f"reloaded model reproduces the error rate: {again.error_rate == result.error_rate}")

print("\n=== noise robustness, miniature edition ===")
print("variance   test error")
for variance in (0.0, 0.1, 0.2, 0.3):
    noisy_model, _ = train_model(config.replace(noise_variance=variance))
    noisy_result, _ = evaluate_model(noisy_model, on="test")
    print(f"  {variance:.2f}     {noisy_result.error_rate:.3f}")
print("(noise is injected into both the training and the test images)")
