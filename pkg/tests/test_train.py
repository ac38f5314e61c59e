import copy
import math

import pytest
import torch
from torch import nn

from threatgen.core import (
    ADAM_BETAS,
    ComponentBundle,
    EpochRecord,
    LossWeights,
    NoiseBatch,
    TrainConfig,
    TrainingDiverged,
    config_digest,
    generator_step,
    load_checkpoint,
    read_metric_log,
    save_checkpoint,
    train,
    write_metric_log,
)

NOISE_DIM = 3
DATA_DIM = 4


def make_bundle(seed: int = 0, objective=None, alert=None) -> ComponentBundle:
    torch.manual_seed(seed)
    gen = nn.Sequential(nn.Linear(NOISE_DIM, 8), nn.Tanh(), nn.Linear(8, DATA_DIM))
    disc = nn.Sequential(nn.Linear(DATA_DIM, 8), nn.Tanh(), nn.Linear(8, 1))
    if objective is None:
        objective = lambda x: x.mean()  # noqa: E731
    return ComponentBundle(gen, disc, objective, NOISE_DIM, alert_system=alert)


def real_data(n: int = 64, seed: int = 5) -> torch.Tensor:
    g = torch.Generator().manual_seed(seed)
    return torch.randn((n, DATA_DIM), generator=g)


def test_noise_batch_seed_reproducible():
    a = NoiseBatch.draw(4, NOISE_DIM, seed=11).values
    b = NoiseBatch.draw(4, NOISE_DIM, seed=11).values
    assert torch.equal(a, b)
    with pytest.raises(ValueError):
        NoiseBatch.draw(0, NOISE_DIM)


def test_generator_step_degenerates_to_plain_wasserstein_step():
    # weights (0, 1, 0): the composed step must be bit-identical to a reference
    # generator step that minimizes -mean(D(G(z))) directly
    bundle = make_bundle(seed=1)
    reference = make_bundle(seed=1)
    assert all(torch.equal(p, q) for p, q in zip(
        bundle.generator.state_dict().values(), reference.generator.state_dict().values()))

    noise = NoiseBatch.draw(16, NOISE_DIM, seed=2).values
    w = LossWeights(0.0, 1.0, 0.0)
    opt = torch.optim.Adam(bundle.generator.parameters(), lr=1e-3, betas=ADAM_BETAS)
    generator_step(bundle, w, opt, noise)

    ref_opt = torch.optim.Adam(reference.generator.parameters(), lr=1e-3, betas=ADAM_BETAS)
    ref_opt.zero_grad(set_to_none=True)
    loss = -reference.discriminator(reference.generator(noise)).mean()
    loss.backward()
    ref_opt.step()

    for p, q in zip(bundle.generator.state_dict().values(),
                    reference.generator.state_dict().values()):
        assert torch.equal(p, q)


def test_generator_step_term_values():
    bundle = make_bundle(seed=2, alert=lambda x: (x ** 2).mean())
    noise = NoiseBatch.draw(8, NOISE_DIM, seed=3).values
    with torch.no_grad():
        fake = bundle.generator(noise)
        expected_obj = float(fake.mean())
        expected_gan = float(-bundle.discriminator(fake).mean())
        expected_alert = float((fake ** 2).mean())
    w = LossWeights(2.0, 3.0, 0.5)
    opt = torch.optim.SGD(bundle.generator.parameters(), lr=0.0)
    terms = generator_step(bundle, w, opt, noise)
    assert terms["obj"] == pytest.approx(expected_obj, rel=1e-6)
    assert terms["gan"] == pytest.approx(expected_gan, rel=1e-6)
    assert terms["alert"] == pytest.approx(expected_alert, rel=1e-6)
    assert terms["total"] == pytest.approx(
        2.0 * expected_obj + 3.0 * expected_gan + 0.5 * expected_alert, rel=1e-5)


def test_generator_step_requires_alert_system_when_gamma_positive():
    bundle = make_bundle(seed=3)
    opt = torch.optim.SGD(bundle.generator.parameters(), lr=0.0)
    noise = NoiseBatch.draw(4, NOISE_DIM, seed=4).values
    with pytest.raises(ValueError):
        generator_step(bundle, LossWeights(1, 1, 1), opt, noise)


def test_generator_step_divergence_carries_term_name():
    bundle = make_bundle(seed=4, objective=lambda x: x.mean() * math.nan)
    opt = torch.optim.SGD(bundle.generator.parameters(), lr=0.0)
    noise = NoiseBatch.draw(4, NOISE_DIM, seed=5).values
    with pytest.raises(TrainingDiverged) as exc:
        generator_step(bundle, LossWeights(1, 1, 0), opt, noise, epoch=7)
    assert exc.value.term == "objective"
    assert exc.value.epoch == 7


def test_combined_loss_gradient_matches_finite_differences():
    # float64 end-to-end check of the composed loss gradient on one weight entry
    torch.manual_seed(6)
    gen = nn.Linear(NOISE_DIM, DATA_DIM).double()
    disc = nn.Linear(DATA_DIM, 1).double()
    noise = NoiseBatch.draw(32, NOISE_DIM, seed=6, dtype=torch.float64).values
    w = LossWeights(1.5, 2.5, 0.75)

    def total_loss():
        fake = gen(noise)
        obj = fake.mean()
        gan = -disc(fake).mean()
        alert = (fake ** 2).mean()
        return w.alpha * obj + w.beta * gan + w.gamma * alert

    loss = total_loss()
    gen.zero_grad()
    loss.backward()
    analytic = gen.weight.grad[0, 0].item()

    h = 1e-6
    with torch.no_grad():
        gen.weight[0, 0] += h
        up = total_loss().item()
        gen.weight[0, 0] -= 2 * h
        down = total_loss().item()
        gen.weight[0, 0] += h
    numeric = (up - down) / (2 * h)
    assert numeric == pytest.approx(analytic, rel=1e-3, abs=1e-9)


def test_train_is_deterministic():
    cfg = TrainConfig(learning_rate=1e-3, epochs=2, batch_size=8, seed=13)
    data = real_data()
    pair_a = train(make_bundle(seed=9), data, LossWeights(1, 1, 0), cfg)
    pair_b = train(make_bundle(seed=9), data, LossWeights(1, 1, 0), cfg)
    assert [r.to_json() for r in pair_a.records] == [r.to_json() for r in pair_b.records]
    for p, q in zip(pair_a.generator.state_dict().values(),
                    pair_b.generator.state_dict().values()):
        assert torch.equal(p, q)


def test_train_records_one_entry_per_epoch():
    cfg = TrainConfig(epochs=3, batch_size=8, seed=0)
    pair = train(make_bundle(seed=10), real_data(), LossWeights(1, 1, 0), cfg)
    assert [r.epoch for r in pair.records] == [0, 1, 2]
    for r in pair.records:
        assert 0.0 <= r.disc_accuracy <= 1.0
        assert 0.0 <= r.disc_auc <= 1.0


def test_train_changes_parameters():
    cfg = TrainConfig(epochs=1, batch_size=8, seed=0)
    bundle = make_bundle(seed=11)
    before = copy.deepcopy(bundle.generator.state_dict())
    train(bundle, real_data(), LossWeights(1, 1, 0), cfg)
    changed = any(not torch.equal(before[k], v)
                  for k, v in bundle.generator.state_dict().items())
    assert changed


def test_train_rejects_too_little_data():
    cfg = TrainConfig(epochs=1, batch_size=64, seed=0)
    with pytest.raises(ValueError):
        train(make_bundle(), real_data(n=32), LossWeights(1, 1, 0), cfg)


def test_train_raises_on_divergence():
    bad = make_bundle(seed=12, objective=lambda x: x.mean() / 0.0)
    cfg = TrainConfig(epochs=1, batch_size=8, seed=0)
    with pytest.raises(TrainingDiverged):
        train(bad, real_data(), LossWeights(1, 0, 0), cfg)


def test_metric_log_roundtrip(tmp_path):
    records = [
        EpochRecord(0, -1.2345678901234567, 0.1, 0.0, -1.1345678901234567, 0.5, 0.75),
        EpochRecord(1, 3.0, -0.25, 1e-12, 2.75, 1.0, 1.0),
    ]
    path = tmp_path / "metrics.jsonl"
    write_metric_log(records, path)
    loaded = read_metric_log(path)
    assert loaded == records  # float repr roundtrips exactly through JSON


def test_config_digest_is_order_insensitive_and_sensitive_to_values():
    a = config_digest({"x": 1, "y": 2})
    b = config_digest({"y": 2, "x": 1})
    c = config_digest({"x": 1, "y": 3})
    assert a == b
    assert a != c
    assert config_digest(TrainConfig()) == config_digest(TrainConfig())


def test_checkpoint_roundtrip_and_digest_guard(tmp_path):
    torch.manual_seed(14)
    module = nn.Linear(4, 2)
    digest = config_digest({"lr": 1e-3})
    path = tmp_path / "gen.pt"
    save_checkpoint(path, module, digest, meta={"target_item": 7})
    fresh = nn.Linear(4, 2)
    meta = load_checkpoint(path, fresh, expected_digest=digest)
    assert meta == {"target_item": 7}
    assert torch.equal(fresh.weight, module.weight)
    with pytest.raises(ValueError):
        load_checkpoint(path, fresh, expected_digest="deadbeef")
