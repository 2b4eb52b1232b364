# Stieltjes procedure for the flat density on [0, Wc], discretized by a
# 120-point Gauss-Legendre rule (exact for the first 50 recurrence
# coefficients) in 60-digit arithmetic. Prints beta_n / Wc for n = 1..50;
# the values are frozen in tests/test_bath_chain.cpp.
import mpmath as mp
mp.mp.dps = 60
Wc = 80*mp.pi
N = 120
def legendre_nodes(n):
    xs, ws = [], []
    for i in range(1, n+1):
        x = mp.cos(mp.pi*(i-mp.mpf(1)/4)/(n+mp.mpf(1)/2))
        for _ in range(100):
            p0, p1 = mp.mpf(1), x
            for k in range(2, n+1):
                p0, p1 = p1, ((2*k-1)*x*p1-(k-1)*p0)/k
            dp = n*(x*p1-p0)/(x*x-1)
            dx = p1/dp
            x -= dx
            if abs(dx) < mp.mpf(10)**-55: break
        p0, p1 = mp.mpf(1), x
        for k in range(2, n+1):
            p0, p1 = p1, ((2*k-1)*x*p1-(k-1)*p0)/k
        dp = n*(x*p1-p0)/(x*x-1)
        xs.append(x); ws.append(2/((1-x*x)*dp*dp))
    return xs, ws
ys, ws = legendre_nodes(N)
xs = [Wc/2*(1+y) for y in ys]
ws = [w/2 for w in ws]  # normalized: sum = 1 (J = 1/Wc times Wc/2 jacobian)
pim1 = [mp.mpf(0)]*N
pi = [mp.mpf(1)]*N
alphas, betas = [], []
nrm_prev = None
for n in range(0, 52):
    nrm = mp.fsum(w*p*p for w, p in zip(ws, pi))
    a = mp.fsum(w*x*p*p for w, x, p in zip(ws, xs, pi))/nrm
    alphas.append(a)
    b2 = nrm/nrm_prev if nrm_prev is not None else mp.mpf(0)
    if n > 0: betas.append(mp.sqrt(b2))
    nxt = [(x-a)*p - b2*q for x, p, q in zip(xs, pi, pim1)]
    pim1, pi, nrm_prev = pi, nxt, nrm
for n in range(1, 51):
    closed = Wc*n/(2*mp.sqrt(4*n*n-1))
    assert abs(betas[n-1]-closed) < mp.mpf(10)**-40*Wc, n
for n in range(0, 51):
    assert abs(alphas[n]-Wc/2) < mp.mpf(10)**-40*Wc
print("ok")
for n in range(1, 51):
    print(n, mp.nstr(betas[n-1]/Wc, 25))
