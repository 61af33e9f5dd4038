#include "elab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace elab::fourier {

u64 checked_states(u64 q, u32 dim, u64 cap) {
    u128 s = 1;
    for (u32 i = 0; i < dim; ++i) {
        s *= q;
        if (s > cap)
            throw cap_exceeded("torus state space q^dim exceeds the cap; use sampling mode");
    }
    return u64(s);
}

u64 TorusMeasure::index_of(const std::vector<u64>& v) const {
    u64 idx = 0, mult = 1;
    for (u32 i = 0; i < dim; ++i) {
        idx += (v[i] % q) * mult;
        mult *= q;
    }
    return idx;
}

std::vector<u64> TorusMeasure::vector_of(u64 index) const {
    std::vector<u64> v(dim);
    for (u32 i = 0; i < dim; ++i) {
        v[i] = index % q;
        index /= q;
    }
    return v;
}

TorusMeasure TorusMeasure::delta(u64 q, u32 dim, const std::vector<u64>& v) {
    TorusMeasure t;
    t.q = q;
    t.dim = dim;
    t.w.assign(checked_states(q, dim, kDefaultStateCap), 0.0);
    t.w[t.index_of(v)] = 1.0;
    return t;
}

namespace {

std::vector<u64> reduce_vec(const std::vector<i64>& v, u64 q) {
    std::vector<u64> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        i64 r = v[i] % i64(q);
        if (r < 0) r += i64(q);
        out[i] = u64(r);
    }
    return out;
}

// per-atom permutation of torus states under x -> g x
std::vector<u32> state_action(const modq::Mat& g, u64 q, u32 dim, u64 states) {
    std::vector<u32> act(states);
    std::vector<u64> x(dim), y(dim);
    for (u64 s = 0; s < states; ++s) {
        u64 t = s;
        for (u32 i = 0; i < dim; ++i) {
            x[i] = t % q;
            t /= q;
        }
        for (u32 r = 0; r < dim; ++r) {
            u128 acc = 0;
            for (u32 c = 0; c < dim; ++c) acc += u128(g.at(r, c)) * x[c];
            y[r] = u64(acc % q);
        }
        u64 idx = 0, mult = 1;
        for (u32 i = 0; i < dim; ++i) {
            idx += y[i] * mult;
            mult *= q;
        }
        act[s] = u32(idx);
    }
    return act;
}

std::vector<modq::Mat> support_mats(const WordMeasure& mu, u64 q) {
    auto gens = mu.S.effective();
    std::vector<modq::Mat> mats;
    for (const auto& word : mu.words) {
        modq::IntMat m = modq::IntMat::identity(mu.S.d);
        for (int letter : word) {
            const modq::IntMat& g = gens[size_t(std::abs(letter)) - 1];
            m = modq::int_mul(m, letter > 0 ? g : modq::int_adjugate(g));
        }
        mats.push_back(modq::reduce_mod(m, q));
    }
    return mats;
}

}  // namespace

TorusMeasure push_linear(const WordMeasure& mu, const std::vector<i64>& v, u64 q, u32 n,
                         u64 state_cap) {
    const u32 dim = mu.S.d;
    if (v.size() != dim) throw domain_error("push_linear: vector dimension mismatch");
    std::vector<u64> v0 = reduce_vec(v, q);
    if (std::all_of(v0.begin(), v0.end(), [](u64 x) { return x == 0; }))
        throw domain_error("push_linear: v = 0 mod q");
    u64 states = checked_states(q, dim, state_cap);

    TorusMeasure cur;
    cur.q = q;
    cur.dim = dim;
    cur.w.assign(states, 0.0);
    cur.w[cur.index_of(v0)] = 1.0;

    auto mats = support_mats(mu, q);
    std::vector<std::vector<u32>> acts;
    for (const auto& m : mats) acts.push_back(state_action(m, q, dim, states));

    std::vector<double> next(states);
    for (u32 step = 0; step < n; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (size_t a = 0; a < acts.size(); ++a) {
            double wt = mu.weights[a];
            const auto& act = acts[a];
            for (u64 s = 0; s < states; ++s)
                if (cur.w[s] != 0.0) next[act[s]] += wt * cur.w[s];
        }
        cur.w.swap(next);
    }
    return cur;
}

TorusMeasure push_linear_sampled(const WordMeasure& mu, const std::vector<i64>& v, u64 q, u32 n,
                                 u64 samples, u64 seed) {
    const u32 dim = mu.S.d;
    std::vector<u64> v0 = reduce_vec(v, q);
    u64 states = checked_states(q, dim, kDefaultStateCap);
    TorusMeasure cur;
    cur.q = q;
    cur.dim = dim;
    cur.w.assign(states, 0.0);

    auto mats = support_mats(mu, q);
    std::vector<double> cum;
    double running = 0;
    for (double w : mu.weights) cum.push_back(running += w);

    Rng rng(derive_seed(seed, "push_linear_sampled"));
    std::vector<u64> x(dim), y(dim);
    for (u64 s = 0; s < samples; ++s) {
        x = v0;
        for (u32 step = 0; step < n; ++step) {
            double u = rng.unit() * running;
            size_t pick = size_t(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
            if (pick >= mats.size()) pick = mats.size() - 1;
            const modq::Mat& g = mats[pick];
            for (u32 r = 0; r < dim; ++r) {
                u128 acc = 0;
                for (u32 c = 0; c < dim; ++c) acc += u128(g.at(r, c)) * x[c];
                y[r] = u64(acc % q);
            }
            x = y;
        }
        cur.w[cur.index_of(x)] += 1.0;
    }
    for (double& w : cur.w) w /= double(samples);
    return cur;
}

std::complex<double> fourier_coeff(const TorusMeasure& nu, const std::vector<i64>& b) {
    const u64 q = nu.q;
    std::vector<u64> bb = reduce_vec(b, q);
    std::vector<std::complex<double>> roots(q);
    for (u64 k = 0; k < q; ++k)
        roots[k] = std::polar(1.0, 2.0 * std::numbers::pi * double(k) / double(q));
    std::complex<double> acc = 0;
    for (u64 s = 0; s < nu.states(); ++s) {
        if (nu.w[s] == 0.0) continue;
        u64 t = s;
        u64 phase = 0;
        for (u32 i = 0; i < nu.dim; ++i) {
            phase = (phase + bb[i] * (t % q)) % q;
            t /= q;
        }
        acc += nu.w[s] * roots[phase];
    }
    return acc;
}

std::vector<std::complex<double>> full_spectrum(const TorusMeasure& nu) {
    const u64 q = nu.q;
    const u64 states = nu.states();
    std::vector<std::complex<double>> roots(q);
    for (u64 k = 0; k < q; ++k)
        roots[k] = std::polar(1.0, 2.0 * std::numbers::pi * double(k) / double(q));
    std::vector<std::complex<double>> data(states);
    for (u64 s = 0; s < states; ++s) data[s] = nu.w[s];
    std::vector<std::complex<double>> line(q), out(q);
    u64 stride = 1;
    for (u32 axis = 0; axis < nu.dim; ++axis) {
        const u64 block = stride * q;
        for (u64 base = 0; base < states; base += block)
            for (u64 off = 0; off < stride; ++off) {
                for (u64 j = 0; j < q; ++j) line[j] = data[base + off + j * stride];
                for (u64 k = 0; k < q; ++k) {
                    std::complex<double> acc = 0;
                    for (u64 j = 0; j < q; ++j) acc += line[j] * roots[(j * k) % q];
                    out[k] = acc;
                }
                for (u64 k = 0; k < q; ++k) data[base + off + k * stride] = out[k];
            }
        stride *= q;
    }
    return data;
}

DecayProfile decay_profile(const TorusMeasure& nu) {
    auto spec = full_spectrum(nu);
    const u64 q = nu.q;
    std::vector<double> bucket_max;   // indexed by divisor position
    std::vector<u64> divisors;        // all s = q/gcd values are divisors of q
    for (u64 s = 1; s <= q; ++s)
        if (q % s == 0) divisors.push_back(s);
    bucket_max.assign(divisors.size(), 0.0);
    std::vector<u64> bucket_count(divisors.size(), 0);
    auto div_pos = [&](u64 s) {
        return size_t(std::lower_bound(divisors.begin(), divisors.end(), s) - divisors.begin());
    };
    for (u64 idx = 0; idx < spec.size(); ++idx) {
        u64 t = idx;
        u64 g = q;
        for (u32 i = 0; i < nu.dim; ++i) {
            g = gcd_u64(g, t % q);
            t /= q;
        }
        u64 s = q / g;
        size_t pos = div_pos(s);
        bucket_max[pos] = std::max(bucket_max[pos], std::abs(spec[idx]));
        ++bucket_count[pos];
    }
    DecayProfile out;
    for (size_t i = 0; i < divisors.size(); ++i)
        out.buckets.push_back({divisors[i], bucket_max[i], bucket_count[i]});
    // least squares of log max against log s over buckets with s > 1,
    // skipping empty (max = 0) buckets
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    u64 pts = 0;
    for (const auto& b : out.buckets) {
        if (b.s == 1 || b.max_abs <= 0.0) continue;
        double x = std::log(double(b.s)), y = std::log(b.max_abs);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    if (pts == 0) {
        out.tau_defined = false;  // +infinity sentinel
        return out;
    }
    double slope;
    if (pts == 1) {
        slope = sy / sx;  // line through the origin when a single point exists
    } else {
        double denom = double(pts) * sxx - sx * sx;
        slope = denom != 0 ? (double(pts) * sxy - sx * sy) / denom : 0.0;
    }
    out.tau_hat = -slope;
    out.tau_defined = true;
    return out;
}

namespace {

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * std::numbers::pi / double(len) * (inverse ? -1 : 1);
        std::complex<double> wl = std::polar(1.0, ang);
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w = 1.0;
            for (size_t j = 0; j < len / 2; ++j) {
                auto u = a[i + j], v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= double(n);
}

// circular convolution of indicators on (Z/q)^dim; boolean saturation after
void convolve_indicator(std::vector<char>& cur, const std::vector<char>& x, u64 q, u32 dim,
                        u64 states) {
    bool pow2 = (q & (q - 1)) == 0 && q > 1;
    if (pow2) {
        std::vector<std::complex<double>> fa(states), fb(states);
        for (u64 i = 0; i < states; ++i) {
            fa[i] = double(cur[i]);
            fb[i] = double(x[i]);
        }
        // axis-wise radix-2 FFT
        auto axis_fft = [&](std::vector<std::complex<double>>& d, bool inv) {
            std::vector<std::complex<double>> line(q);
            u64 stride = 1;
            for (u32 axis = 0; axis < dim; ++axis) {
                const u64 block = stride * q;
                for (u64 base = 0; base < states; base += block)
                    for (u64 off = 0; off < stride; ++off) {
                        for (u64 j = 0; j < q; ++j) line[j] = d[base + off + j * stride];
                        fft_pow2(line, inv);
                        for (u64 j = 0; j < q; ++j) d[base + off + j * stride] = line[j];
                    }
                stride *= q;
            }
        };
        axis_fft(fa, false);
        axis_fft(fb, false);
        for (u64 i = 0; i < states; ++i) fa[i] *= fb[i];
        axis_fft(fa, true);
        for (u64 i = 0; i < states; ++i) cur[i] = fa[i].real() > 0.5 ? 1 : 0;
        return;
    }
    std::vector<char> next(states, 0);
    std::vector<u64> xi(dim), yi(dim);
    for (u64 a = 0; a < states; ++a) {
        if (!cur[a]) continue;
        u64 t = a;
        for (u32 i = 0; i < dim; ++i) {
            xi[i] = t % q;
            t /= q;
        }
        for (u64 b = 0; b < states; ++b) {
            if (!x[b]) continue;
            u64 tb = b, idx = 0, mult = 1;
            for (u32 i = 0; i < dim; ++i) {
                idx += ((xi[i] + tb % q) % q) * mult;
                tb /= q;
                mult *= q;
            }
            next[idx] = 1;
        }
    }
    cur.swap(next);
}

}  // namespace

u64 sumset_count(const std::vector<u32>& A, const grp::GroupTable& T, const std::vector<i64>& v,
                 u64 q, u32 C, u64 state_cap) {
    if (C < 1) throw domain_error("sumset_count: C must be >= 1");
    if (T.q.q % q != 0) throw domain_error("sumset_count: q must divide the table modulus");
    const u32 dim = T.d;
    u64 states = checked_states(q, dim, state_cap);
    std::vector<u64> v0 = reduce_vec(v, q);

    std::vector<char> X(states, 0);
    for (u32 a : A) {
        const u64* e = T.entries(a);
        u64 idx = 0, mult = 1;
        for (u32 r = 0; r < dim; ++r) {
            u128 acc = 0;
            for (u32 c = 0; c < dim; ++c) acc += u128(e[size_t(r) * dim + c] % q) * v0[c];
            idx += u64(acc % q) * mult;
            mult *= q;
        }
        X[idx] = 1;
    }
    std::vector<char> cur = X;
    for (u32 fold = 1; fold < C; ++fold) convolve_indicator(cur, X, q, dim, states);
    return u64(std::count(cur.begin(), cur.end(), char(1)));
}

OrbitCount adjoint_orbit_count(const std::vector<u32>& A, const grp::GroupTable& T, u32 g_idx,
                               u64 q_I, u32 C, u32 dim_G, double delta, u64 node_cap) {
    if (T.q.q % q_I != 0) throw domain_error("adjoint_orbit_count: q_I must divide the modulus");
    OrbitCount out;
    modq::FactoredModulus fm = modq::factorize(q_I);
    modq::Mat g = modq::mat_reduce(T.element(g_idx), q_I);
    modq::Mat gm1 = modq::mat_sub(g, modq::Mat::identity(T.d, q_I));
    for (const auto& [p, mp] : fm.factors) {
        u32 need = std::max(u64(1) + modq::delta2(p), u64(std::floor(delta * double(mp))));
        if (modq::vp_mat(gm1, p, mp) < need) out.precondition_ok = false;
    }
    u64 g_gcd = modq::gcd_shift(fm, g);
    out.benchmark = std::pow(double(q_I) / double(g_gcd), double(dim_G));

    // conjugate set mod q_I
    std::vector<modq::Mat> conj;
    {
        std::unordered_set<std::string> seen;
        for (u32 a : A) {
            modq::Mat m =
                modq::mat_reduce(T.element(T.mul(T.mul(a, g_idx), T.inv(a))), q_I);
            std::string key(reinterpret_cast<const char*>(m.a.data()), m.a.size() * sizeof(u64));
            if (seen.insert(key).second) conj.push_back(std::move(m));
        }
    }
    // cumulative union of products of 1..C conjugates
    std::unordered_set<std::string> all;
    std::vector<modq::Mat> frontier;
    for (const auto& m : conj) {
        std::string key(reinterpret_cast<const char*>(m.a.data()), m.a.size() * sizeof(u64));
        if (all.insert(key).second) frontier.push_back(m);
    }
    for (u32 k = 2; k <= C && !frontier.empty(); ++k) {
        std::vector<modq::Mat> next;
        for (const auto& x : frontier)
            for (const auto& s : conj) {
                if (all.size() >= node_cap)
                    throw cap_exceeded("adjoint_orbit_count: node cap exceeded");
                modq::Mat y = modq::mat_mul(x, s);
                std::string key(reinterpret_cast<const char*>(y.a.data()),
                                y.a.size() * sizeof(u64));
                if (all.insert(key).second) next.push_back(std::move(y));
            }
        frontier = std::move(next);
    }
    out.count = all.size();
    return out;
}

}  // namespace elab::fourier
