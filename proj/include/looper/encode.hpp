#pragma once

#include <map>

#include "looper/cnf.hpp"
#include "looper/constraints.hpp"

namespace looper {

using IntegerModel = std::map<int, mpz_class>;  // symbol -> value

/// Sign-magnitude layout of one symbol: a sign variable plus k magnitude
/// variables, least significant first.
struct SignMagLayout {
    int sign = 0;
    std::vector<int> mag;
};

struct VarMap {
    int bits = 3;
    std::map<int, SignMagLayout> layout;
};

struct EncodeResult {
    CnfFormula cnf;
    VarMap vm;
    bool too_large = false;
    long clause_budget = 0;
};

/// Bit-level encoding: every symbol of the system gets sign + k magnitude
/// bits; polynomial evaluation uses widened two's-complement circuits so no
/// overflow is representable. Values with |v| = 0 never decode as -0.
EncodeResult encode(const DiophantineSystem& ds, int bits, long clause_budget = 5000000);

/// Extra unit constraints pinning symbols to concrete values (used to search
/// for small witness models).
EncodeResult encode_with_pins(const DiophantineSystem& ds, int bits, long clause_budget,
                              const IntegerModel& pins);

IntegerModel decode(const std::vector<bool>& model, const VarMap& vm);

/// Exact evaluation of every constraint under the model.
bool check_model(const DiophantineSystem& ds, const IntegerModel& m);

}  // namespace looper
