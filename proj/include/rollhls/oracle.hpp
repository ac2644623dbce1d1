#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rollhls/ir.hpp"

namespace rollhls {

/// Values for every kernel parameter in declaration order: one entry per
/// element for input arrays, an empty list for output arrays, a single value
/// for bound scalars.
struct InputVector {
  std::vector<std::vector<u128>> values;
};

/// Contents of every output array, in declaration order.
using Outputs = std::vector<std::vector<u128>>;

/// Kernel lowered to slot-resolved form for repeated evaluation. Immutable
/// after construction; `run` may be called from several threads.
class CompiledKernel {
 public:
  explicit CompiledKernel(const Kernel &k);
  ~CompiledKernel();
  CompiledKernel(CompiledKernel &&) noexcept;
  CompiledKernel &operator=(CompiledKernel &&) noexcept;

  Outputs run(const InputVector &x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Reference semantics: wrapping arithmetic at each declared width.
Outputs eval(const Kernel &k, const InputVector &x);

InputVector random_input(const Kernel &k, std::mt19937_64 &rng);
/// All-zero, all-ones, and one vector per bit position with every input
/// element set to that single bit.
std::vector<InputVector> corner_inputs(const Kernel &k);

struct SignatureMismatch : IrError {
  using IrError::IrError;
};

struct Counterexample {
  InputVector input;
  std::string location;  // e.g. "o[3]"
  u128 expected = 0;     // first program
  u128 actual = 0;       // second program
};

struct EquivVerdict {
  bool equivalent = true;
  std::optional<Counterexample> counterexample;
  int vectors_tested = 0;
  uint64_t seed = 0;
};

/// Compare outputs on the corner vectors followed by `n_vectors` random
/// vectors drawn from `seed`. Vectors are evaluated in parallel; the reported
/// counterexample is always the first failing vector in generation order.
EquivVerdict check_equiv(const Kernel &a, const Kernel &b, int n_vectors = 1000, uint64_t seed = 1);
/// Single-threaded reference for check_equiv.
EquivVerdict check_equiv_serial(const Kernel &a, const Kernel &b, int n_vectors = 1000, uint64_t seed = 1);

/// Throws SignatureMismatch unless parameter kinds, types and lengths agree.
void require_same_signature(const Kernel &a, const Kernel &b);

nlohmann::json verdict_to_json(const EquivVerdict &v, const Kernel &k);

/// Expand every loop and inline every call. Requires constant bounds.
/// Locals defined inside loop bodies get one copy per iteration.
Program unroll(const StructuredProgram &s);

}  // namespace rollhls
