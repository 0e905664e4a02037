import numpy as np
import burstlab as bl

BSTAR = -1.2*4/3 - 0.3*5/27  # -1.655556

def probe(yf, bf, t_end=60000, b0_off=-0.06, theta=0.8, verbose=False):
    m = bl.build('fn-hom', {'y_fold': yf, 'beta_fold': bf})
    x0 = np.array([-1.8, 1-5*1.8**2, -0.3, BSTAR + b0_off])
    evs = bl.spike_events(0, theta)
    try:
        tr = bl.integrate(m.system, x0, (0, t_end), bl.IntegratorConfig(), evs)
    except Exception as e:
        return dict(ok=False, why=f'int fail {e}')
    t, x, z, b = tr.times, tr.component(0), tr.component(2), tr.component(3)
    ups = np.array([e.time for e in tr.events if e.kind=='spike-up'])
    if len(ups) < 6:
        return dict(ok=False, why=f'{len(ups)} spikes')
    isi = np.diff(ups); med = np.median(isi)
    sp = np.where(isi > 10*med)[0]
    starts = np.concatenate(([ups[0]], ups[sp+1]))
    if len(starts) < 4:
        return dict(ok=False, why=f'{len(starts)} bursts')
    bS = np.array([b[min(np.searchsorted(t, s), len(t)-1)] for s in starts])
    per = np.diff(starts)
    drift = bS[-1]-bS[-2]
    # SAOs in last silent window
    prev = ups[(ups>=starts[-2])&(ups<starts[-1])][-1]
    w = (t>prev+30)&(t<starts[-1])
    xx = x[w]
    nsao = 0
    if len(xx) > 10:
        pk = np.where((xx[1:-1]>xx[:-2])&(xx[1:-1]>=xx[2:]))[0]+1
        for i in pk:
            l = xx[max(0,i-500):i].min(); r = xx[i:i+500].min()
            if xx[i]-max(l,r) > 1e-3 and xx[i] < theta:
                nsao += 1
    M = 0.033 - 0.0005*(-7.888888888888889-yf)**2 - (-0.008)*(BSTAR-bf)**2
    return dict(ok=True, cross=bS[-1], dist=abs(bS[-1]-BSTAR), drift=drift,
                period=per[-1], nsao=nsao, M=M, nb=len(starts))

if __name__ == '__main__':
    import itertools, sys
    rows = []
    yfs = [-26, -24, -22, -20, -18, -17, -16.5, -16]
    bfs = [BSTAR, BSTAR-1, BSTAR-2, BSTAR-3, BSTAR-3.6, BSTAR+2, BSTAR+3.6, 1.96]
    for yf, bf in itertools.product(yfs, bfs):
        r = probe(yf, bf, t_end=50000)
        tag = f'yf={yf:7.2f} bf={bf:7.3f}'
        if not r['ok']:
            print(f'{tag}  FAIL {r["why"]}'); continue
        print(f'{tag}  cross={r["cross"]:9.5f} dist={r["dist"]:7.4f} drift={r["drift"]:+.5f} '
              f'per={r["period"]:7.1f} SAO={r["nsao"]:3d} M={r["M"]:+.5f} nb={r["nb"]}')
