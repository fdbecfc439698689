"""End-to-end acceptance checks; each test prints a single PASS/FAIL verdict line."""

import dataclasses
import math
import time

import numpy as np
import pytest
import torch

from acceptance_log import report
from helpers import assert_samples_close, finite_difference_check
from oracles import brute_min_ade, brute_min_fde, brute_miss_rate, brute_offroad_rate
from trajpred.attention import AttentionParams, InteractionAttention, NeighborSet, area_att, area_scores, \
    dist_att, dist_scores
from trajpred.decoder import CONTEXT_DIM, ModeDecoder
from trajpred.encoders import EncoderParams, MapEncoder, TrackEncoder
from trajpred.metrics import min_ade_k, min_fde_k, miss_rate_k, offroad_rate, top_k
from trajpred.model import predict
from trajpred.raster import rasterize
from trajpred.scene import FUTURE_STEPS, HISTORY_STEPS, PredictionSet, to_target_frame, transform_sample
from trajpred.synth import SCENARIO_KINDS, ScenarioSpec, generate_dataset, generate_scenario, make_split, \
    read_samples, write_samples
from trajpred.train import ConstantVelocityPredictor, TrainConfig, as_features, evaluate, train

T = FUTURE_STEPS


def test_1_metric_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, instances = 0.0, 0
    for _ in range(80):
        k_modes, n = int(rng.integers(1, 7)), int(rng.integers(1, 9))
        cases, preds, masks = [], [], []
        for _ in range(n):
            gt = np.cumsum(rng.normal(1.0, 1.5, (T, 2)), axis=0)
            modes = gt[None] + rng.normal(0, rng.uniform(0.2, 4), (k_modes, T, 2))
            probs = rng.dirichlet(np.ones(k_modes)) if rng.random() < 0.7 else np.full(k_modes, 1 / k_modes)
            cases.append((modes.tolist(), probs.tolist(), gt.tolist()))
            preds.append(PredictionSet(modes, probs))
            masks.append(rng.random((240, 240)) < 0.95)
            instances += 1
        gts = [np.array(c[2]) for c in cases]
        for k in range(1, k_modes + 1):
            for p, (m, pr, g) in zip(preds, cases):
                worst = max(worst, abs(min_ade_k(p, np.array(g), k) - brute_min_ade(m, pr, g, k)),
                            abs(min_fde_k(p, np.array(g), k) - brute_min_fde(m, pr, g, k)))
            worst = max(worst, abs(miss_rate_k(preds, gts, k) - brute_miss_rate(cases, k)))
        worst = max(worst, abs(offroad_rate(preds, masks)
                               - brute_offroad_rate([(c[0], c[1]) for c in cases], [m.tolist() for m in masks])))
    elapsed = time.perf_counter() - start
    passed = instances >= 200 and worst <= 1e-9 and elapsed < 10
    report(1, "metric oracle equivalence", passed,
           f"{instances} instances, max abs error {worst:.2e}, {elapsed:.1f} s")
    assert passed


def test_2_attention_correctness():
    two = NeighborSet(k_pos=np.array([[1.0, 0.0], [0.0, 2.0]]), k_area=np.array([10.0, 20.0]),
                      v=np.eye(2, 128), q_area=10.0)
    expected = np.array([0.622459, 0.377541])
    hand = max(np.abs(dist_scores(two) - expected).max(), np.abs(area_scores(two) - expected).max(),
               np.abs(dist_att(two)[:2] - expected).max(), np.abs(area_att(two)[:2] - expected).max())
    rng = np.random.default_rng(7)
    norm_err = perm_err = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        mask = rng.random(n) < 0.8
        mask[rng.integers(n)] = True
        ns = NeighborSet(rng.uniform(-40, 40, (n, 2)), rng.uniform(0.3, 40, n), rng.normal(size=(n, 16)), mask,
                         q_area=float(rng.uniform(0.3, 40)))
        params = AttentionParams(alpha1=rng.uniform(0.1, 3), alpha2=rng.uniform(0.1, 3), w_area=rng.uniform(0.1, 3))
        for w in (dist_scores(ns, params), area_scores(ns, params)):
            norm_err = max(norm_err, abs(w.sum() - 1), -w.min(), np.abs(w[~mask]).max(initial=0))
        perm = rng.permutation(n)
        shuffled = NeighborSet(ns.k_pos[perm], ns.k_area[perm], ns.v[perm], mask[perm], q_area=ns.q_area)
        perm_err = max(perm_err, np.abs(dist_att(shuffled, params) - dist_att(ns, params)).max(),
                       np.abs(area_att(shuffled, params) - area_att(ns, params)).max())
    passed = hand <= 1e-6 and norm_err <= 1e-6 and perm_err <= 1e-9
    report(2, "attention correctness", passed,
           f"hand cases err {hand:.1e}, normalisation err {norm_err:.1e}, permutation err {perm_err:.1e} "
           f"over 1000 instances")
    assert passed


def test_3_gradient_verification():
    start = time.perf_counter()
    worst = 0.0
    tiny = EncoderParams(conv_channels=4, lstm_hidden=128)
    for seed in range(20):
        torch.manual_seed(seed)
        rng = np.random.default_rng(seed)
        att = InteractionAttention(init=AttentionParams(alpha1=rng.uniform(0.5, 2), alpha2=rng.uniform(0.5, 2),
                                                        w_area=rng.uniform(0.5, 2))).double()
        b, n = 2, 4
        args = (torch.zeros(b, 2, dtype=torch.float64), torch.tensor(rng.uniform(-6, 6, (b, n, 2))),
                torch.tensor(rng.uniform(2, 10, b)), torch.tensor(rng.uniform(2, 10, (b, n))),
                torch.tensor(rng.normal(size=(b, n, 8))), torch.tensor(rng.random((b, n)) < 0.8) | torch.eye(b, n).bool())
        target = torch.tensor(rng.normal(size=(b, 16)))
        worst = max(worst, finite_difference_check(lambda: ((att(*args) - target) ** 2).sum(),
                                                   [att.alpha1, att.w_dist_raw, att.alpha2, att.w_area], seed=seed))

        track = TrackEncoder(params=tiny).double().eval()
        x = torch.randn(2, HISTORY_STEPS + 1, 5, dtype=torch.float64)
        w = torch.randn(128, dtype=torch.float64)
        worst = max(worst, finite_difference_check(lambda: (track(x) * w).sum(), list(track.parameters()),
                                                   entries_per_param=2, seed=seed))

        cnn = MapEncoder(image_shape=(16, 16, 3)).double().eval()
        img = torch.rand(1, 3, 16, 16, dtype=torch.float64)
        worst = max(worst, finite_difference_check(lambda: (cnn(img) * w).sum(), list(cnn.parameters()),
                                                   entries_per_param=2, seed=seed))

        mode = ModeDecoder(hidden=16, params=tiny).double().eval()
        z = torch.randn(2, CONTEXT_DIM, dtype=torch.float64)
        gt = torch.randn(2, T, 2, dtype=torch.float64) * 5
        worst = max(worst, finite_difference_check(lambda: ((mode(z)[0] - gt) ** 2).mean(),
                                                   list(mode.trajectory_head.parameters()), entries_per_param=3,
                                                   seed=seed))
        score = list(mode.path_encoder.parameters()) + list(mode.score_head.parameters())
        worst = max(worst, finite_difference_check(lambda: (mode(z)[1] ** 2).sum(), score, entries_per_param=2,
                                                   seed=seed))
    elapsed = time.perf_counter() - start
    passed = worst < 1e-4 and elapsed < 120
    report(3, "gradient verification", passed, f"20 instances, max relative error {worst:.2e}, {elapsed:.1f} s")
    assert passed


def test_4_overfit_sanity():
    items = as_features(generate_dataset(10, seed=7))
    config = TrainConfig(epochs=500, batch_size=10, learning_rate=2e-3, lr_step_size=50, lr_gamma=0.8, seed=0)
    start = time.perf_counter()
    model, record = train(config, items)
    elapsed = time.perf_counter() - start
    result, _ = evaluate(model, items)
    steps = len(record.epoch_losses) * math.ceil(len(items) / config.batch_size)
    passed = steps == 500 and result.minADE_1 < 0.3 and elapsed < 300
    report(4, "overfit sanity", passed, f"{steps} steps, train minADE_1 {result.minADE_1:.3f} m, {elapsed:.0f} s")
    assert passed


def test_5_anti_mode_collapse():
    start = time.perf_counter()
    samples = generate_dataset(1000, seed=11, kinds=("fork",))
    lefts = np.mean([s.future[-1, 1] > 0 for s in samples])
    items = {it.sample_id: it for it in as_features(samples)}
    split = make_split(list(items), (0.8, 0.1, 0.1), seed=0)
    train_items, test_items = [items[i] for i in split.train], [items[i] for i in split.test]
    config = TrainConfig(epochs=20, learning_rate=1e-3, lr_gamma=0.9, num_modes=2, seed=0)
    model, _ = train(config, train_items)
    preds = predict(model, test_items)
    ade1 = np.mean([min_ade_k(p, it.future, 1) for p, it in zip(preds, test_items)])
    ade2 = np.mean([min_ade_k(p, it.future, 2) for p, it in zip(preds, test_items)])
    separated = np.mean([np.linalg.norm(p.modes[0, -1] - p.modes[1, -1]) > 2.0 for p in preds])
    elapsed = time.perf_counter() - start
    passed = abs(lefts - 0.5) <= 0.05 and ade2 < 0.5 * ade1 and separated >= 0.8 and elapsed < 900
    report(5, "anti-mode-collapse on forks", passed,
           f"left share {lefts:.3f}, minADE_1 {ade1:.2f}, minADE_2 {ade2:.2f} (ratio {ade2 / ade1:.2f}), "
           f"modes >2 m apart on {separated:.0%} of {len(preds)} test samples, {elapsed:.0f} s")
    assert passed


@pytest.fixture(scope="module")
def curved_benchmark():
    samples = generate_dataset(1000, seed=21, kinds=("left_turn", "right_turn", "u_turn"))
    by_id = {s.sample_id: s for s in samples}
    split = make_split(list(by_id), (0.7, 0.1, 0.2), seed=0)
    test_samples = [by_id[i] for i in split.test]
    train_items = as_features([by_id[i] for i in split.train])
    test_items = as_features(test_samples)
    base = TrainConfig(epochs=20, learning_rate=1e-3, seed=0)
    target_only = dataclasses.replace(base, use_map=False, use_distance_attention=False, use_area_attention=False)
    reports = {"cv": evaluate(ConstantVelocityPredictor(), test_samples)[0]}
    for name, cfg in (("full", base), ("target only", target_only)):
        model, _ = train(cfg, train_items)
        reports[name] = evaluate(model, test_items)[0]
    return reports


def test_6_beats_constant_velocity(curved_benchmark):
    cv, full = curved_benchmark["cv"].minADE_5, curved_benchmark["full"].minADE_5
    gain = 1 - full / cv
    passed = gain >= 0.2
    report(6, "model beats constant velocity-and-yaw", passed,
           f"minADE_5 model {full:.2f} vs baseline {cv:.2f} ({gain:.0%} lower)")
    assert passed


def test_7_map_and_attention_help(curved_benchmark):
    full, target = curved_benchmark["full"].minADE_5, curved_benchmark["target only"].minADE_5
    passed = full <= target
    report(7, "ablation trend", passed, f"minADE_5 map+attention {full:.2f} vs target encoder only {target:.2f}")
    assert passed


def test_8_rasterizer_invariance():
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(50):
        kind = SCENARIO_KINDS[i % len(SCENARIO_KINDS)]
        sample = generate_scenario(ScenarioSpec(kind, float(rng.uniform(2, 12)), n_neighbors=3,
                                                seed=int(rng.integers(2**63))))
        moved = to_target_frame(transform_sample(sample, float(rng.uniform(-math.pi, math.pi)),
                                                 rng.uniform(-1000, 1000, 2)))
        changed = (rasterize(sample) != rasterize(moved)).any(axis=-1).mean()
        worst = max(worst, changed)
    passed = worst <= 0.01
    report(8, "rasterizer SE(2) invariance", passed, f"worst changed-pixel share {worst:.4%} over 50 scenes")
    assert passed


def test_9_interchange_round_trip(tmp_path):
    samples = generate_dataset(1000, seed=9)
    path = tmp_path / "samples.jsonl"
    write_samples(samples, path)
    loaded = read_samples(path, normalize=False)
    try:
        assert len(loaded) == 1000
        for a, b in zip(samples, loaded):
            assert_samples_close(a, b, atol=1e-12)
        passed, detail = True, "1000 samples equal within 1e-12"
    except AssertionError as exc:
        passed, detail = False, str(exc).splitlines()[0]
    report(9, "interchange round-trip", passed, detail)
    assert passed
