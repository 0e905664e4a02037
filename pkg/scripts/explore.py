"""Scratch exploration for calibrating zoo presets. Not part of the package."""
import numpy as np
import burstlab as bl
from burstlab.integrate import IntegratorConfig


def burst_report(mid, t_end=None, theta=None, x0=None, overrides=None, keep=None):
    m = bl.build(mid, overrides)
    h = m.preset.hints
    sim = dict(h.sim_overrides)
    params = m.params.updated(sim) if sim else m.params
    sysm = m.system.with_params(params)
    th = theta if theta is not None else h.theta_spike
    if h.polar:
        evs = bl.spike_events(0, th, polar=(0, 1))
    else:
        evs = bl.spike_events(h.spike_index, th)
    span = (0.0, t_end if t_end else m.preset.t_span[1])
    cfg = IntegratorConfig(max_step=h.max_step)
    tr = bl.integrate(sysm, x0 if x0 is not None else m.preset.x0, span, cfg, evs)
    ups = np.array([e.time for e in tr.events if e.kind == 'spike-up'])
    print(f'--- {mid}: steps={len(tr.times)} spikes={len(ups)} t_end={span[1]}')
    for i in range(tr.dim):
        c = tr.component(i)
        print(f'  comp{i}: [{c.min():.4g}, {c.max():.4g}] final {c[-1]:.6g}')
    if len(ups) > 1:
        isi = np.diff(ups)
        med = np.median(isi)
        gaps = np.where(isi > 3 * med)[0]
        starts = np.concatenate(([ups[0]], ups[gaps + 1])) if len(gaps) else np.array([ups[0]])
        print(f'  burst starts: {starts.round(1)}')
        if len(starts) > 2:
            print(f'  periods: {np.diff(starts).round(2)}')
        counts = []
        bounds = np.concatenate((starts, [span[1] + 1]))
        for a, b in zip(bounds[:-1], bounds[1:]):
            counts.append(int(((ups >= a) & (ups < b)).sum()))
        print(f'  spikes/burst: {counts}')
        # slow state at burst starts
        for s in starts:
            i = np.searchsorted(tr.times, s)
            print(f'   start t={s:.1f} state={np.round(tr.states[min(i, len(tr.times)-1)], 5)}')
    return tr, m


if __name__ == '__main__':
    import sys
    mid = sys.argv[1] if len(sys.argv) > 1 else 'fn-hom'
    burst_report(mid)
