"""Exact L1 distance from a box to the local polytope.

The local polytope for n parties is the convex hull of the 4^n
deterministic product strategies (each party fixes an output bit for
each of its two inputs).  The distance

    d(P) = min over local boxes Q of sum_{x,a} |P(a|x) - Q(a|x)|

is a linear program.  We solve it in exact rational arithmetic and
return a self-verifying certificate: a mixture of vertices achieving
the distance (primal), and entry multipliers g in [-1,1] whose slack
against the best deterministic strategy proves no local box does
better (dual).  Equality of the two bounds certifies optimality
without trusting the solver.

LP shape, chosen so a feasible basis is available in closed form: with
lambda the vertex weights and r+/r- the split entrywise residuals,

    minimize   sum(r+ + r-)
    subject to D lambda + r+ - r- = p      (one row per (input, output))
               sum lambda = 1,   all variables >= 0

where column D_v is the 0/1 table of vertex v and p is the box being
measured.  Seeding the basis with the best-overlap vertex plus one
residual variable per row skips simplex phase 1 entirely.

An optional quotient (`use_symmetry=True`) shrinks the LP by the group
of even-weight global output flips: for boxes invariant under that
group (all parity-constrained boxes are) the orbit-averaged vertex
columns depend only on the output-parity pattern of the strategy,
which is an affine function of the inputs, so 4^n columns collapse to
2^(n+1).  The certificate it returns is for the full problem and is
checked the same way.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .anf import BooleanFunctionANF
from .boxes import ConditionalBox, l1_box_distance
from .encoding import format_bits, format_rational, index_to_bits, parity
from .simplex import ExactSimplex

DEFAULT_PARTY_CAP = 5

ZERO = Fraction(0)
ONE = Fraction(1)


class CertificateError(ValueError):
    """A DistanceCertificate failed exact re-verification."""


@dataclass(frozen=True)
class LocalVertex:
    """Deterministic product strategy.

    Party i (1-based) holds the two bits code>>(2i-2) & 3: bit 0 is its
    output when x_i = 0, bit 1 its output when x_i = 1.
    """

    n: int
    code: int

    def __post_init__(self):
        if not 0 <= self.code < 1 << (2 * self.n):
            raise ValueError(
                f"code {self.code} out of range for {self.n} parties"
            )

    def output_for(self, xi: int) -> int:
        a = 0
        code = self.code
        for i in range(self.n):
            pair = (code >> (2 * i)) & 3
            bit = (pair >> 1) if (xi >> i) & 1 else (pair & 1)
            a |= bit << i
        return a

    def box(self) -> ConditionalBox:
        size = 1 << self.n
        rows = []
        for xi in range(size):
            row = [ZERO] * size
            row[self.output_for(xi)] = ONE
            rows.append(row)
        return ConditionalBox(self.n, rows)


def enumerate_vertices(n: int):
    """All 4^n deterministic strategies, in code order."""
    return tuple(LocalVertex(n, v) for v in range(1 << (2 * n)))


@lru_cache(maxsize=8)
def _vertex_outputs(n: int):
    """vout[v][xi] = output index of vertex v at input xi."""
    size = 1 << n
    table = []
    for v in range(1 << (2 * n)):
        pairs = [(v >> (2 * i)) & 3 for i in range(n)]
        outs = []
        for xi in range(size):
            a = 0
            for i in range(n):
                bit = (pairs[i] >> 1) if (xi >> i) & 1 else (pairs[i] & 1)
                a |= bit << i
            outs.append(a)
        table.append(tuple(outs))
    return tuple(table)


def nearest_affine_oracle(f: BooleanFunctionANF):
    """Closest affine function to f in Hamming distance.

    Returns (count, witness): the number of inputs where f disagrees
    with the best affine function c0 xor (xor of x_i over mask l), and
    that function as an ANF.  Ties resolve to the smallest (l, c0).
    """
    n = f.n
    size = 1 << n
    truth = f.truth_table()
    best = None
    best_l = best_c0 = 0
    for l in range(size):
        for c0 in (0, 1):
            count = 0
            for xi in range(size):
                if truth[xi] != parity(xi & l) ^ c0:
                    count += 1
            if best is None or count < best:
                best, best_l, best_c0 = count, l, c0
    monomials = {frozenset({i + 1}) for i in range(n) if (best_l >> i) & 1}
    if best_c0:
        monomials.add(frozenset())
    return best, BooleanFunctionANF(n, frozenset(monomials))


@dataclass(frozen=True)
class DistanceCertificate:
    """Exact optimality certificate for the local-polytope distance.

    weights:  sparse (vertex code, weight) pairs, a convex combination.
    dual:     one multiplier per (input, output) entry, each in [-1,1].
    dual_opt: max over vertices v of <dual, D_v>; the dual bound is
              <dual, p> - dual_opt and equals `distance`.
    """

    n: int
    distance: Fraction
    weights: tuple
    dual: tuple
    dual_opt: Fraction
    closest_box: ConditionalBox
    method: str
    backend: str
    pivots: int

    def verify(self, box: ConditionalBox) -> bool:
        """Recompute every claim from scratch; raise CertificateError on
        the first failure, return True when the certificate is sound."""
        n = self.n
        if box.n != n:
            raise CertificateError(f"box has n={box.n}, certificate n={n}")
        size = 1 << n
        nvert = 1 << (2 * n)
        total = ZERO
        seen = set()
        for code, w in self.weights:
            if not 0 <= code < nvert:
                raise CertificateError(f"vertex code {code} out of range")
            if code in seen:
                raise CertificateError(f"vertex code {code} repeated")
            seen.add(code)
            if w <= 0:
                raise CertificateError(f"weight of vertex {code} not positive")
            total += w
        if total != ONE:
            raise CertificateError(f"weights sum to {total}, not 1")

        vout = _vertex_outputs(n)
        mixture = [[ZERO] * size for _ in range(size)]
        for code, w in self.weights:
            outs = vout[code]
            for xi in range(size):
                mixture[xi][outs[xi]] += w
        for xi in range(size):
            if tuple(mixture[xi]) != self.closest_box.row(xi):
                raise CertificateError(f"closest box mismatch at input {xi}")

        primal = l1_box_distance(box, self.closest_box)
        if primal != self.distance:
            raise CertificateError(
                f"mixture achieves {primal}, certificate says {self.distance}"
            )

        if len(self.dual) != size * size:
            raise CertificateError("dual length is not 4^n")
        for g in self.dual:
            if not -ONE <= g <= ONE:
                raise CertificateError(f"dual multiplier {g} outside [-1,1]")
        best = None
        for v in range(nvert):
            outs = vout[v]
            acc = ZERO
            for xi in range(size):
                acc += self.dual[(xi << n) | outs[xi]]
            if best is None or acc > best:
                best = acc
        if best != self.dual_opt:
            raise CertificateError(
                f"dual_opt is {self.dual_opt}, recomputed {best}"
            )
        bound = -self.dual_opt
        for xi in range(size):
            row = box.row(xi)
            for ai in range(size):
                if row[ai]:
                    bound += self.dual[(xi << n) | ai] * row[ai]
        if bound != self.distance:
            raise CertificateError(
                f"dual bound {bound} does not match distance {self.distance}"
            )
        return True

    def as_dict(self) -> dict:
        n = self.n
        size = 1 << n
        probs = {}
        for xi in range(size):
            key = format_bits(index_to_bits(xi, n))
            row = self.closest_box.row(xi)
            probs[key] = {
                format_bits(index_to_bits(ai, n)): format_rational(row[ai])
                for ai in range(size)
                if row[ai]
            }
        return {
            "n": n,
            "distance": format_rational(self.distance),
            "weights": [
                [code, format_rational(w)] for code, w in self.weights
            ],
            "dual": [format_rational(g) for g in self.dual],
            "dual_opt": format_rational(self.dual_opt),
            "closest_box": {"n": n, "kind": "table", "probs": probs},
            "method": self.method,
            "backend": self.backend,
            "pivots": self.pivots,
        }


def _box_entries(box: ConditionalBox):
    size = 1 << box.n
    p = []
    for xi in range(size):
        p.extend(box.row(xi))
    return p


def _assemble_full(box: ConditionalBox):
    """Canonical starting tableau for the full LP; see module docstring."""
    n = box.n
    size = 1 << n
    nvert = 1 << (2 * n)
    nent = size * size
    p = _box_entries(box)
    vout = _vertex_outputs(n)

    best = None
    v0 = 0
    for v in range(nvert):
        outs = vout[v]
        acc = ZERO
        for xi in range(size):
            acc += p[(xi << n) | outs[xi]]
        if best is None or acc > best:
            best, v0 = acc, v
    outs0 = vout[v0]

    # sigma[e] = +1 where the slack r+ starts basic, -1 where r- does
    sigma = []
    rho_abs = []
    for xi in range(size):
        for ai in range(size):
            rho = p[(xi << n) | ai] - (ONE if outs0[xi] == ai else ZERO)
            sigma.append(1 if rho >= 0 else -1)
            rho_abs.append(abs(rho))

    ncols = nvert + 2 * nent + 1
    nrows = nent + 2
    nums = [0] * (nrows * ncols)
    dens = [1] * (nrows * ncols)

    def put(r, c, frac):
        i = r * ncols + c
        nums[i] = frac.numerator
        dens[i] = frac.denominator

    norm_row = nent
    obj_row = nent + 1
    for v in range(nvert):
        outs = vout[v]
        rc = 0
        for xi in range(size):
            av = outs[xi]
            a0 = outs0[xi]
            if av == a0:
                continue
            e1 = (xi << n) | av
            e0 = (xi << n) | a0
            nums[e1 * ncols + v] = sigma[e1]
            nums[e0 * ncols + v] = -sigma[e0]
            rc -= sigma[e1] - sigma[e0]
        nums[norm_row * ncols + v] = 1
        nums[obj_row * ncols + v] = rc
    basis = []
    for e in range(nent):
        cp = nvert + e
        cm = nvert + nent + e
        s = sigma[e]
        nums[e * ncols + cp] = s
        nums[e * ncols + cm] = -s
        nums[obj_row * ncols + cp] = 1 - s
        nums[obj_row * ncols + cm] = 1 + s
        put(e, ncols - 1, rho_abs[e])
        basis.append(cp if s > 0 else cm)
    basis.append(v0)
    nums[norm_row * ncols + (ncols - 1)] = 1
    put(obj_row, ncols - 1, -sum(rho_abs, ZERO))
    return nrows, ncols, nums, dens, basis


def _solve_full(box: ConditionalBox, force_pure: bool):
    n = box.n
    size = 1 << n
    nvert = 1 << (2 * n)
    nent = size * size
    nrows, ncols, nums, dens, basis = _assemble_full(box)
    pairs = {}
    for e in range(nent):
        pairs[nvert + e] = (nvert + nent + e, 2)
        pairs[nvert + nent + e] = (nvert + e, 2)
    engine = ExactSimplex(
        nrows, ncols, nums, dens, basis,
        residual_pairs=pairs, force_pure=force_pure,
    )
    result = engine.solve()

    values = engine.basic_values()
    weights = sorted(
        (col, w) for col, w in values.items() if col < nvert and w > 0
    )
    dual = tuple(ONE - engine.reduced_cost(nvert + e) for e in range(nent))
    return result, weights, dual


def _group_check(box: ConditionalBox):
    """The quotient needs invariance under even-weight output flips;
    checking the n-1 adjacent-pair generators covers the group."""
    n = box.n
    size = 1 << n
    for i in range(n - 1):
        t = (1 << i) | (1 << (i + 1))
        for xi in range(size):
            row = box.row(xi)
            for ai in range(size):
                if row[ai] != row[ai ^ t]:
                    return False
    return True


def _solve_symmetric(box: ConditionalBox, force_pure: bool):
    """Quotient LP over output-parity classes; see module docstring."""
    n = box.n
    size = 1 << n
    nvert = 1 << (2 * n)
    p = _box_entries(box)
    vout = _vertex_outputs(n)
    half = ONE / (1 << (n - 1))
    wclass = Fraction(1 << (n - 1))

    # vertex orbits <-> parity patterns; keep the smallest code per orbit
    reps = {}
    for v in range(nvert):
        key = 0
        outs = vout[v]
        for xi in range(size):
            key |= parity(outs[xi]) << xi
        if key not in reps:
            reps[key] = v
    orbits = sorted(reps.values())
    patterns = []
    for v in orbits:
        outs = vout[v]
        patterns.append(tuple(parity(outs[xi]) for xi in range(size)))

    # class c = (input xi, output parity pi); representative output: pi
    nclass = 2 * size
    p_rep = []
    for xi in range(size):
        for pi in (0, 1):
            p_rep.append(p[(xi << n) | pi])

    norb = len(orbits)
    best = None
    o0 = 0
    for o, pat in enumerate(patterns):
        acc = ZERO
        for xi in range(size):
            acc += p_rep[2 * xi + pat[xi]]
        if best is None or acc > best:
            best, o0 = acc, o
    pat0 = patterns[o0]

    sigma = []
    rho_abs = []
    for xi in range(size):
        for pi in (0, 1):
            rho = p_rep[2 * xi + pi] - (half if pat0[xi] == pi else ZERO)
            sigma.append(1 if rho >= 0 else -1)
            rho_abs.append(abs(rho))

    ncols = norb + 2 * nclass + 1
    nrows = nclass + 2
    nums = [0] * (nrows * ncols)
    dens = [1] * (nrows * ncols)

    def put(r, c, frac):
        i = r * ncols + c
        nums[i] = frac.numerator
        dens[i] = frac.denominator

    norm_row = nclass
    obj_row = nclass + 1
    for o, pat in enumerate(patterns):
        rc = ZERO
        for xi in range(size):
            if pat[xi] == pat0[xi]:
                continue
            c1 = 2 * xi + pat[xi]
            c0 = 2 * xi + pat0[xi]
            put(c1, o, sigma[c1] * half)
            put(c0, o, -sigma[c0] * half)
            rc -= wclass * half * (sigma[c1] - sigma[c0])
        nums[norm_row * ncols + o] = 1
        put(obj_row, o, rc)
    basis = []
    for c in range(nclass):
        cp = norb + c
        cm = norb + nclass + c
        s = sigma[c]
        nums[c * ncols + cp] = s
        nums[c * ncols + cm] = -s
        put(obj_row, cp, wclass * (1 - s))
        put(obj_row, cm, wclass * (1 + s))
        put(c, ncols - 1, rho_abs[c])
        basis.append(cp if s > 0 else cm)
    basis.append(o0)
    nums[norm_row * ncols + (ncols - 1)] = 1
    put(obj_row, ncols - 1, -wclass * sum(rho_abs, ZERO))

    pairs = {}
    for c in range(nclass):
        pairs[norb + c] = (norb + nclass + c, 2 * wclass)
        pairs[norb + nclass + c] = (norb + c, 2 * wclass)
    engine = ExactSimplex(
        nrows, ncols, nums, dens, basis,
        residual_pairs=pairs, force_pure=force_pure,
    )
    result = engine.solve()

    # spread each orbit weight uniformly over its 2^(n-1) members
    flips = [t for t in range(size) if parity(t) == 0]
    values = engine.basic_values()
    spread = {}
    for col, w in values.items():
        if col >= norb or w <= 0:
            continue
        v = orbits[col]
        share = w * half
        for t in flips:
            member = v
            for i in range(n):
                if (t >> i) & 1:
                    member ^= 3 << (2 * i)
            spread[member] = spread.get(member, ZERO) + share
    weights = sorted(spread.items())

    dual = [ZERO] * (size * size)
    for c in range(nclass):
        y = wclass - engine.reduced_cost(norb + c)
        g = y / wclass
        xi, pi = divmod(c, 2)
        for ai in range(size):
            if parity(ai) == pi:
                dual[(xi << n) | ai] = g
    return result, weights, tuple(dual)


def l1_distance_to_local(
    box: ConditionalBox,
    *,
    method: str = "exact",
    use_symmetry: bool = False,
    party_cap: int = DEFAULT_PARTY_CAP,
    force_pure: bool = False,
) -> DistanceCertificate:
    """Exact distance from `box` to the local polytope, with certificate.

    method="exact" runs the rational simplex directly.  method="presolve"
    first asks a floating-point solver for candidate witnesses, verifies
    them exactly, and falls back to the exact run if certification fails
    (requires scipy).  The returned certificate is exact either way.
    """
    n = box.n
    if n > party_cap:
        raise ValueError(
            f"n={n} exceeds the size cap {party_cap}; raise party_cap to force"
        )
    if method not in ("exact", "presolve"):
        raise ValueError(f"unknown method {method!r}")
    if use_symmetry and not _group_check(box):
        raise ValueError(
            "box is not invariant under even-weight output flips; "
            "symmetry reduction is inapplicable"
        )

    if method == "presolve":
        cert = _presolve_attempt(box)
        if cert is not None:
            return cert

    if use_symmetry:
        result, weights, dual = _solve_symmetric(box, force_pure)
        method_used = "exact+symmetry"
    else:
        result, weights, dual = _solve_full(box, force_pure)
        method_used = "exact"
    if method == "presolve":
        method_used = "presolve-fallback-" + method_used

    cert = _finish_certificate(
        box, result.objective, weights, dual,
        method_used, result.backend, result.pivots,
    )
    return cert


def _finish_certificate(box, distance, weights, dual, method, backend, pivots):
    n = box.n
    size = 1 << n
    vout = _vertex_outputs(n)
    rows = [[ZERO] * size for _ in range(size)]
    for code, w in weights:
        outs = vout[code]
        for xi in range(size):
            rows[xi][outs[xi]] += w
    closest = ConditionalBox(n, rows)

    best = None
    for v in range(len(vout)):
        outs = vout[v]
        acc = ZERO
        for xi in range(size):
            acc += dual[(xi << n) | outs[xi]]
        if best is None or acc > best:
            best = acc

    cert = DistanceCertificate(
        n=n,
        distance=distance,
        weights=tuple(weights),
        dual=tuple(dual),
        dual_opt=best,
        closest_box=closest,
        method=method,
        backend=backend,
        pivots=pivots,
    )
    cert.verify(box)
    return cert


def _presolve_attempt(box: ConditionalBox):
    """Float LP for candidate witnesses, certified exactly or discarded."""
    try:
        import numpy as np
        from scipy.optimize import linprog
    except ImportError as exc:
        raise ValueError("method='presolve' requires scipy and numpy") from exc

    n = box.n
    size = 1 << n
    nvert = 1 << (2 * n)
    nent = size * size
    p = np.array([float(v) for v in _box_entries(box)])
    vout = _vertex_outputs(n)
    D = np.zeros((nent, nvert))
    for v in range(nvert):
        outs = vout[v]
        for xi in range(size):
            D[(xi << n) | outs[xi], v] = 1.0

    # variables: lambda (nvert) then t (nent); min sum t
    c = np.concatenate([np.zeros(nvert), np.ones(nent)])
    eye = np.eye(nent)
    a_ub = np.block([[D, -eye], [-D, -eye]])
    b_ub = np.concatenate([p, -p])
    a_eq = np.zeros((1, nvert + nent))
    a_eq[0, :nvert] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=(0, None), method="highs")
    if not res.success:
        return None

    lam = [Fraction(x).limit_denominator(1 << 40) for x in res.x[:nvert]]
    lam = [w if w > 0 else ZERO for w in lam]
    total = sum(lam, ZERO)
    if total == 0:
        return None
    lam = [w / total for w in lam]
    weights = [(v, w) for v, w in enumerate(lam) if w > 0]

    # ineq marginals come in the (upper, lower) block order used above;
    # the entry multiplier is their difference and lands in [-1,1]
    marg = res.ineqlin.marginals
    dual = []
    for e in range(nent):
        g = Fraction(float(marg[e] - marg[nent + e])).limit_denominator(1 << 40)
        dual.append(max(-ONE, min(ONE, g)))
    pe = _box_entries(box)
    rows = [[ZERO] * size for _ in range(size)]
    for code, w in weights:
        outs = vout[code]
        for xi in range(size):
            rows[xi][outs[xi]] += w
    primal_val = ZERO
    for xi in range(size):
        row = box.row(xi)
        for ai in range(size):
            primal_val += abs(row[ai] - rows[xi][ai])
    best = None
    for v in range(nvert):
        outs = vout[v]
        acc = ZERO
        for xi in range(size):
            acc += dual[(xi << n) | outs[xi]]
        if best is None or acc > best:
            best = acc
    dual_val = -best
    for e in range(nent):
        if pe[e]:
            dual_val += dual[e] * pe[e]
    if primal_val != dual_val:
        return None
    return _finish_certificate(
        box, primal_val, weights, tuple(dual), "presolve", "float+exact", 0
    )
