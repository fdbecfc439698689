import numpy as np


def assert_samples_close(a, b, atol=1e-12):
    """Field-by-field comparison of two samples."""
    assert a.sample_id == b.sample_id
    np.testing.assert_allclose(a.future, b.future, atol=atol, rtol=0)
    tracks_a, tracks_b = a.agents(), b.agents()
    assert len(tracks_a) == len(tracks_b)
    for ta, tb in zip(tracks_a, tracks_b):
        assert ta.agent_id == tb.agent_id and ta.info == tb.info
        assert len(ta.states) == len(tb.states)
        for sa, sb in zip(ta.states, tb.states):
            assert (sa.t, sa.valid) == (sb.t, sb.valid)
            np.testing.assert_allclose([sa.x, sa.y, sa.heading, sa.v, sa.a, sa.yaw_rate],
                                       [sb.x, sb.y, sb.heading, sb.v, sb.a, sb.yaw_rate], atol=atol, rtol=0)
    for (name, la), (_, lb) in zip(a.map.layers(), b.map.layers()):
        assert len(la) == len(lb), name
        for pa, pb in zip(la, lb):
            np.testing.assert_allclose(pa, pb, atol=atol, rtol=0)


def finite_difference_check(loss_fn, params, step=1e-5, entries_per_param=6, seed=0, floor=1e-6):
    """Max relative error between autograd and central differences.

    ``loss_fn`` is a zero-argument callable returning a scalar tensor; every
    tensor in ``params`` must be a float64 leaf requiring grad.  A random
    subset of entries of each parameter is probed.
    """
    import torch

    rng = np.random.default_rng(seed)
    for p in params:
        p.grad = None
    loss_fn().backward()
    analytic = [p.grad.detach().clone() for p in params]
    worst = 0.0
    with torch.no_grad():
        for p, g in zip(params, analytic):
            flat, gflat = p.view(-1), g.view(-1)
            picks = rng.choice(flat.numel(), size=min(entries_per_param, flat.numel()), replace=False)
            for i in picks:
                orig = flat[i].item()
                flat[i] = orig + step
                up = loss_fn().item()
                flat[i] = orig - step
                down = loss_fn().item()
                flat[i] = orig
                numeric = (up - down) / (2 * step)
                a = gflat[i].item()
                worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), floor))
    return worst
