#include "looper/encode.hpp"

#include <algorithm>

namespace looper {

namespace {

/// Two's-complement bit vectors of literals, LSB first; the top bit is the
/// sign. Widths grow through operations so arithmetic stays exact.
using BitVec = std::vector<int>;

struct Blaster {
    CnfFormula f;
    long budget;
    bool over = false;
    int lit_true = 0;

    explicit Blaster(long clause_budget) : budget(clause_budget) {
        lit_true = f.new_var();
        clause({lit_true});
    }

    void clause(const std::vector<int>& lits) {
        if (over) return;
        if (f.num_clauses >= budget) {
            over = true;
            return;
        }
        f.add_clause(lits);
    }

    int aux() { return f.new_var(); }

    int land(int a, int b) {
        if (a == -lit_true || b == -lit_true) return -lit_true;
        if (a == lit_true) return b;
        if (b == lit_true) return a;
        int o = aux();
        clause({-a, -b, o});
        clause({a, -o});
        clause({b, -o});
        return o;
    }

    int lxor(int a, int b) {
        if (a == lit_true) return -b;
        if (a == -lit_true) return b;
        if (b == lit_true) return -a;
        if (b == -lit_true) return a;
        int o = aux();
        clause({-a, -b, -o});
        clause({a, b, -o});
        clause({a, -b, o});
        clause({-a, b, o});
        return o;
    }

    int lxor3(int a, int b, int c) { return lxor(lxor(a, b), c); }

    int lmaj(int a, int b, int c) {
        if (a == lit_true) return lor(b, c);
        if (a == -lit_true) return land(b, c);
        if (b == lit_true) return lor(a, c);
        if (b == -lit_true) return land(a, c);
        if (c == lit_true) return lor(a, b);
        if (c == -lit_true) return land(a, b);
        int o = aux();
        clause({-a, -b, o});
        clause({-a, -c, o});
        clause({-b, -c, o});
        clause({a, b, -o});
        clause({a, c, -o});
        clause({b, c, -o});
        return o;
    }

    int lor(int a, int b) { return -land(-a, -b); }

    BitVec sext(const BitVec& v, size_t width) const {
        BitVec out = v;
        while (out.size() < width) out.push_back(v.back());
        return out;
    }

    BitVec add(const BitVec& a0, const BitVec& b0, int carry_in = 0) {
        size_t w = std::max(a0.size(), b0.size()) + 1;
        BitVec a = sext(a0, w);
        BitVec b = sext(b0, w);
        BitVec out(w);
        int carry = carry_in == 0 ? -lit_true : carry_in;
        for (size_t i = 0; i < w; ++i) {
            out[i] = lxor3(a[i], b[i], carry);
            if (i + 1 < w) carry = lmaj(a[i], b[i], carry);
        }
        return out;
    }

    BitVec mul(const BitVec& a0, const BitVec& b0) {
        size_t w = a0.size() + b0.size();
        BitVec a = sext(a0, w);
        BitVec acc(w, -lit_true);
        bool acc_init = false;
        for (size_t i = 0; i < w && !over; ++i) {
            int bit = i < b0.size() ? b0[i] : b0.back();
            if (bit == -lit_true) continue;  // zero row
            BitVec row(w, -lit_true);
            for (size_t j = 0; i + j < w; ++j) row[i + j] = land(a[j], bit);
            if (!acc_init) {
                acc = row;
                acc_init = true;
                continue;
            }
            // accumulate modulo 2^w; exact because the true product fits
            BitVec sum(w);
            int carry = -lit_true;
            for (size_t k = 0; k < w; ++k) {
                sum[k] = lxor3(acc[k], row[k], carry);
                if (k + 1 < w) carry = lmaj(acc[k], row[k], carry);
            }
            acc = sum;
        }
        return acc;
    }

    BitVec negate(const BitVec& v) {
        BitVec inv(v.size() + 1);
        for (size_t i = 0; i < v.size(); ++i) inv[i] = -v[i];
        inv[v.size()] = -v.back();
        return add(inv, BitVec{-lit_true}, lit_true);
    }

    /// Balanced pairwise reduction keeps sum widths logarithmic.
    BitVec add_many(std::vector<BitVec> terms) {
        if (terms.empty()) return {-lit_true};
        while (terms.size() > 1) {
            std::vector<BitVec> next;
            for (size_t i = 0; i + 1 < terms.size(); i += 2)
                next.push_back(add(terms[i], terms[i + 1]));
            if (terms.size() % 2) next.push_back(terms.back());
            terms = std::move(next);
        }
        return terms.front();
    }

    BitVec constant(const mpz_class& v) {
        if (v == 0) return {-lit_true};
        mpz_class a = abs(v);
        size_t w = mpz_sizeinbase(a.get_mpz_t(), 2) + 1;
        mpz_class repr = v < 0 ? mpz_class(v + (mpz_class(1) << w)) : v;
        BitVec out;
        for (size_t i = 0; i < w; ++i)
            out.push_back(mpz_tstbit(repr.get_mpz_t(), i) ? lit_true : -lit_true);
        return out;
    }

    void assert_ge0(const BitVec& v) { clause({-v.back()}); }
    void assert_eq0(const BitVec& v) {
        for (int l : v) clause({-l});
    }
};

}  // namespace

static EncodeResult encode_impl(const DiophantineSystem& ds, int bits, long clause_budget,
                                const IntegerModel* pins) {
    EncodeResult res;
    res.clause_budget = clause_budget;
    res.vm.bits = bits;
    Blaster bl(clause_budget);

    std::vector<int> symbols;
    for (const auto& c : ds.constraints)
        for (int s : c.poly.symbols())
            if (std::find(symbols.begin(), symbols.end(), s) == symbols.end())
                symbols.push_back(s);
    std::sort(symbols.begin(), symbols.end());

    std::map<int, BitVec> sym_vec;
    for (int s : symbols) {
        SignMagLayout layout;
        layout.sign = bl.aux();
        for (int i = 0; i < bits; ++i) layout.mag.push_back(bl.aux());
        // no negative zero
        std::vector<int> nz{-layout.sign};
        for (int m : layout.mag) nz.push_back(m);
        bl.clause(nz);
        res.vm.layout[s] = layout;

        // sign-magnitude -> two's complement (conditional negate)
        BitVec tc(bits + 1);
        BitVec mag_ext(bits + 1);
        for (int i = 0; i < bits; ++i) mag_ext[i] = layout.mag[i];
        mag_ext[bits] = -bl.lit_true;
        BitVec flipped(bits + 1);
        for (int i = 0; i <= bits; ++i) flipped[i] = bl.lxor(mag_ext[i], layout.sign);
        tc = bl.add(flipped, BitVec{layout.sign, -bl.lit_true}, -bl.lit_true);
        tc.resize(bits + 1);  // the value fits; the low bits remain exact
        sym_vec[s] = tc;

        if (pins) {
            auto it = pins->find(s);
            if (it != pins->end()) {
                const mpz_class& v = it->second;
                mpz_class a = abs(v);
                bl.clause({v < 0 ? layout.sign : -layout.sign});
                for (int i = 0; i < bits; ++i)
                    bl.clause({mpz_tstbit(a.get_mpz_t(), i) ? layout.mag[i] : -layout.mag[i]});
            }
        }
    }

    std::map<Polynomial::Monomial, BitVec> mono_cache;
    auto monomial_vec = [&](const Polynomial::Monomial& mono) -> BitVec {
        auto it = mono_cache.find(mono);
        if (it != mono_cache.end()) return it->second;
        BitVec v;
        bool first = true;
        for (const auto& [s, e] : mono) {
            for (int k = 0; k < e; ++k) {
                if (first) {
                    v = sym_vec[s];
                    first = false;
                } else {
                    v = bl.mul(v, sym_vec[s]);
                }
            }
        }
        mono_cache[mono] = v;
        return v;
    };

    for (const auto& c : ds.constraints) {
        if (bl.over) break;
        if (c.poly.is_zero()) continue;  // 0 >= 0 and 0 = 0 both hold
        if (c.poly.is_constant()) {
            const mpz_class& v = c.poly.terms().begin()->second;
            bool ok = c.equality ? v == 0 : v >= 0;
            if (!ok) bl.clause({});  // trivially unsatisfiable constraint
            continue;
        }
        std::vector<BitVec> terms;
        for (const auto& [mono, coeff] : c.poly.terms()) {
            if (bl.over) break;
            if (mono.empty()) {
                terms.push_back(bl.constant(coeff));
            } else if (coeff == 1) {
                terms.push_back(monomial_vec(mono));
            } else if (coeff == -1) {
                terms.push_back(bl.negate(monomial_vec(mono)));
            } else {
                terms.push_back(bl.mul(bl.constant(coeff), monomial_vec(mono)));
            }
        }
        if (bl.over) break;
        BitVec acc = bl.add_many(std::move(terms));
        if (c.equality)
            bl.assert_eq0(acc);
        else
            bl.assert_ge0(acc);
    }

    res.too_large = bl.over;
    res.cnf = std::move(bl.f);
    return res;
}

EncodeResult encode(const DiophantineSystem& ds, int bits, long clause_budget) {
    return encode_impl(ds, bits, clause_budget, nullptr);
}

EncodeResult encode_with_pins(const DiophantineSystem& ds, int bits, long clause_budget,
                              const IntegerModel& pins) {
    return encode_impl(ds, bits, clause_budget, &pins);
}

IntegerModel decode(const std::vector<bool>& model, const VarMap& vm) {
    IntegerModel out;
    for (const auto& [sym, layout] : vm.layout) {
        mpz_class v = 0;
        for (size_t i = 0; i < layout.mag.size(); ++i)
            if (model[layout.mag[i]]) mpz_setbit(v.get_mpz_t(), i);
        if (model[layout.sign]) v = -v;
        if (v == 0) v = 0;  // normalize -0
        out[sym] = v;
    }
    return out;
}

bool check_model(const DiophantineSystem& ds, const IntegerModel& m) {
    for (const auto& c : ds.constraints) {
        mpz_class v = c.poly.eval(m);
        if (c.equality ? v != 0 : v < 0) return false;
    }
    return true;
}

}  // namespace looper
