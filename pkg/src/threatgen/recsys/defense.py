"""Defense evaluation: per-generator discriminator bias vs. a retrained mixed model."""

from __future__ import annotations

import numpy as np
import torch
from sklearn.metrics import roc_auc_score

from ..core.train import NoiseBatch
from .cf import _as_tensor
from .models import RsDiscriminator


def _generate_profiles(generator, n_profiles: int, seed: int) -> torch.Tensor:
    """n_profiles single rows drawn from as many groups as needed."""
    noise_rng = torch.Generator().manual_seed(seed)
    generator.set_sample_seed(seed + 1)
    rows = []
    with torch.no_grad():
        while sum(r.shape[0] for r in rows) < n_profiles:
            noise = NoiseBatch.draw(1, generator.noise_dim, generator=noise_rng).values
            rows.append(generator(noise).reshape(-1, generator.n_items))
    return torch.cat(rows)[:n_profiles]


def _check_disjoint(a: torch.Tensor, b: torch.Tensor) -> None:
    seen = {row.numpy().tobytes() for row in a}
    for row in b:
        if row.numpy().tobytes() in seen:
            raise ValueError("synthetic samples overlap between train and test splits")


def retrain_and_auc(generators: list[tuple[str, torch.nn.Module, torch.nn.Module]],
                    R, seed: int = 0, n_per_generator: int = 100,
                    retrain_epochs: int = 30, lr: float = 1e-3) -> dict:
    """AUC of each GAN-phase discriminator on a mixed test set, then the AUC of a
    fresh discriminator retrained on a mixed training set.

    `generators` holds (name, generator, gan_phase_discriminator) triples.
    Mixed sets combine held-out real rows with synthetic rows from every
    generator; train and test synthetic draws are disjoint by construction and
    verified.
    """
    if len(generators) < 2:
        raise ValueError("the mixed condition needs at least two generators")
    R = _as_tensor(R).to(torch.float32)
    rng = torch.Generator().manual_seed(seed)
    perm = torch.randperm(R.shape[0], generator=rng)
    half = R.shape[0] // 2
    real_train, real_test = R[perm[:half]], R[perm[half:]]

    synth_train, synth_test = [], []
    for i, (_, gen, _) in enumerate(generators):
        tr = _generate_profiles(gen, n_per_generator, seed=seed + 1000 + i)
        te = _generate_profiles(gen, n_per_generator, seed=seed + 2000 + i)
        _check_disjoint(tr, te)
        synth_train.append(tr)
        synth_test.append(te)

    test_x = torch.cat([real_test] + synth_test)
    test_y = np.concatenate([np.zeros(real_test.shape[0]),
                             np.ones(sum(t.shape[0] for t in synth_test))])

    per_generator_auc = {}
    with torch.no_grad():
        for name, _, disc in generators:
            scores = -disc(test_x).numpy()  # critic scores real high; flip for "synthetic" score
            per_generator_auc[name] = float(roc_auc_score(test_y, scores))

    torch.manual_seed(seed + 7)
    model = RsDiscriminator(n_items=R.shape[1])
    train_x = torch.cat([real_train] + synth_train)
    train_y = torch.cat([torch.zeros(real_train.shape[0]),
                         torch.ones(sum(t.shape[0] for t in synth_train))])
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = torch.nn.BCEWithLogitsLoss()
    order_rng = torch.Generator().manual_seed(seed + 8)
    for _ in range(retrain_epochs):
        order = torch.randperm(train_x.shape[0], generator=order_rng)
        for start in range(0, len(order), 64):
            idx = order[start:start + 64]
            opt.zero_grad(set_to_none=True)
            loss = loss_fn(model(train_x[idx]), train_y[idx])
            loss.backward()
            opt.step()

    with torch.no_grad():
        retrained_scores = model(test_x).numpy()
    mixed_retrained_auc = float(roc_auc_score(test_y, retrained_scores))
    return {
        "per_generator_auc": per_generator_auc,
        "mixed_retrained_auc": mixed_retrained_auc,
        "retrained_model": model,
        "test_set": (test_x, test_y),
    }
