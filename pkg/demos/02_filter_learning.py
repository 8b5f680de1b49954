"""How convolution filters come out of compressed patch statistics.

The learning rule never sees labels: it compresses the (mean-removed) patch
autocorrelation through a random Gaussian matrix and inverts the strongest
measurement columns as K-sparse DCT-domain vectors. This script learns a
small bank from synthetic textured images and inspects what that produces:

- every filter has unit Frobenius norm,
- every filter is exactly K-sparse under the DCT (the point-like look of
  the transformed filters), and
- the PCA baseline learned from the same patches for comparison.

Writes PGM images of everything into demos/out/filters/.

Run:  python demos/02_filter_learning.py
"""

from pathlib import Path

import numpy as np

from csnet import (
    FilterBank,
    PatchConfig,
    dct_matrix,
    extract_patches,
    learn_cs_filters,
    learn_pca_filters,
)
from csnet.visualize import write_filter_images

rng = np.random.default_rng(3)

print("=== synthetic training images: oriented gratings + noise ===")
images = []
for i in range(40):
    yy, xx = np.mgrid[0:24, 0:24]
    theta = rng.uniform(0, np.pi)
    freq = rng.uniform(0.3, 1.2)
    wave = np.sin(freq * (np.cos(theta) * xx + np.sin(theta) * yy) + rng.uniform(0, 6.28))
    images.append(0.5 + 0.35 * wave + 0.05 * rng.normal(size=(24, 24)))
images = np.clip(images, 0, 1)
print(f"{len(images)} images of {images[0].shape}")

cfg = PatchConfig(k1=7, k2=7)
patches = extract_patches(list(images), cfg)
print(f"patch matrix: {patches.shape[0]} x {patches.shape[1]} "
      f"(every column is one mean-removed 7x7 patch)")

print()
print("=== sparse-recovery filters ===")
k_sparsity, m_measurements = 7, 25
stage = learn_cs_filters(patches, 8, k_sparsity, m_measurements, seed=11, cfg=cfg)
norms = np.linalg.norm(stage.filters.reshape(8, -1), axis=1)
print(f"unit Frobenius norms: max deviation {abs(norms - 1).max():.1e}")
nnz = [int(np.count_nonzero(v)) for v in stage.dct_vectors]
print(f"nonzeros in the DCT domain per filter (K = {k_sparsity}): {nnz}")
print(f"filters ordered by measurement-column energy: "
      f"{np.round(stage.column_energies, 4).tolist()}")

psi = dct_matrix(cfg.dim)
roundtrip = np.abs(stage.filters.reshape(8, -1) @ psi.T - stage.dct_vectors).max()
print(f"DCT of each spatial filter reproduces its sparse vector: {roundtrip:.1e}")

print()
print("=== PCA baseline from the same patches ===")
pca = learn_pca_filters(patches, 8, cfg)
gram = patches @ patches.T / patches.shape[1]
flat = pca.filters.reshape(8, -1)
off = flat @ gram @ flat.T
off -= np.diag(np.diag(off))
print(f"PCA filters diagonalize the patch autocorrelation "
      f"(off-diagonal mass {np.abs(off).sum():.2e})")

out_dir = Path(__file__).parent / "out" / "filters"
bank = FilterBank(stages=(stage,), k1=7, k2=7)
files = write_filter_images(bank, out_dir)
pca_bank = FilterBank(stages=(pca,), k1=7, k2=7)
files += write_filter_images(pca_bank, out_dir / "pca")
print(f"\nwrote {len(files)} PGM files under {out_dir}")
print("the *_dct.pgm views of the sparse-recovered filters are mostly black")
print("with K bright pixels each; the PCA views are dense by comparison.")
