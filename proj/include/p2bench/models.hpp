#pragma once

#include <string>
#include <vector>

#include "p2bench/rng.hpp"
#include "p2bench/tape.hpp"

namespace p2bench {

using ad::Tape;
using ad::Tensor;

struct NoiseSpec {
    std::size_t dim = 2;  // standard normal entries
};

// MLP generator: y-embedding concatenated to z, two ReLU hidden layers,
// linear scalar output.
struct GeneratorParams {
    Tensor emb;       // K x e
    Tensor w1, b1;    // (nz + e) x h, 1 x h
    Tensor w2, b2;    // h x h, 1 x h
    Tensor w3, b3;    // h x 1, 1 x 1
    NoiseSpec noise;

    std::size_t num_classes() const { return emb.rows(); }
};

// Shared trunk phi plus every head any loss variant needs: dual class
// embeddings Vp/Vq, a tied embedding for the single-projection form, the
// residual head psi, an unconditional head, an amortized gate head, and the
// free scalar behind the global gate.
struct DiscriminatorParams {
    Tensor t_w1, t_b1;        // 1 x h, 1 x h
    Tensor t_w2, t_b2;        // h x h, 1 x h
    Tensor Vp, Vq, Vtied;     // K x h each; Vp and Vq are never aliased
    Tensor psi_w, psi_b;      // h x 1, 1 x 1
    Tensor unc_w, unc_b;      // h x 1, 1 x 1
    Tensor gate_w, gate_b;    // h x 1, 1 x 1
    Tensor gate_scalar;       // 1 x 1, pre-sigmoid

    std::size_t num_classes() const { return Vp.rows(); }
    std::size_t embed_dim() const { return Vp.cols(); }
};

struct NamedParam {
    std::string name;
    Tensor* tensor;
};

// Stable-order parameter lists (serialization, optimizer slots, digests).
std::vector<NamedParam> param_list(GeneratorParams& g);
std::vector<NamedParam> param_list(DiscriminatorParams& d);

GeneratorParams init_generator(std::size_t num_classes, Rng& rng, std::size_t noise_dim = 2,
                               std::size_t emb_dim = 2, std::size_t hidden = 16);
DiscriminatorParams init_discriminator(std::size_t num_classes, Rng& rng,
                                       std::size_t hidden = 16);

std::string params_to_json(GeneratorParams& g);
GeneratorParams generator_from_json(const std::string& text);
std::string params_to_json(DiscriminatorParams& d);
DiscriminatorParams discriminator_from_json(const std::string& text);

// FNV-1a over the raw parameter bytes; used to assert step isolation.
std::uint64_t param_digest(const std::vector<NamedParam>& params);

enum class Head { P, Q };

// ---- tape bindings -------------------------------------------------------

struct GenVars {
    Tape::Var emb, w1, b1, w2, b2, w3, b3;
};
struct DiscVars {
    Tape::Var t_w1, t_b1, t_w2, t_b2;
    Tape::Var Vp, Vq, Vtied;
    Tape::Var psi_w, psi_b, unc_w, unc_b, gate_w, gate_b, gate_scalar;
};

GenVars bind(Tape& tape, const GeneratorParams& g, bool trainable);
DiscVars bind(Tape& tape, const DiscriminatorParams& d, bool trainable);

// G(z, y): noise rows (n x nz) + labels -> samples (n x 1)
Tape::Var generate(Tape& tape, const GenVars& g, Tape::Var z, const std::vector<int>& y);

// phi(x): (n x 1) -> (n x h)
Tape::Var embed(Tape& tape, const DiscVars& d, Tape::Var x);

// (v^p_y - v^q_y)^T phi(x) + psi(phi(x)), given a precomputed phi
Tape::Var dual_proj_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi,
                              const std::vector<int>& y);
// v_y^T phi(x) + psi(phi(x)) with the tied embedding
Tape::Var proj_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi, const std::vector<int>& y,
                         bool with_psi = true);
// v_X^T phi(x) + b, label-independent
Tape::Var uncond_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi);
// log softmax of the head's class logits: (n x K), rows logsumexp to 0
Tape::Var log_posterior_phi(Tape& tape, const DiscVars& d, Head head, Tape::Var phi);
// pre-sigmoid gate head output: (n x 1)
Tape::Var gate_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi);
// sigmoid gate lambda(x) in (0, 1): (n x 1)
Tape::Var gate_phi(Tape& tape, const DiscVars& d, Tape::Var phi);

// Convenience single-input forms matching the batched builders.
Tape::Var dual_proj_logit(Tape& tape, const DiscVars& d, Tape::Var x, const std::vector<int>& y);
Tape::Var proj_logit(Tape& tape, const DiscVars& d, Tape::Var x, const std::vector<int>& y);
Tape::Var uncond_logit(Tape& tape, const DiscVars& d, Tape::Var x);
Tape::Var log_posterior(Tape& tape, const DiscVars& d, Head head, Tape::Var x);
Tape::Var gate(Tape& tape, const DiscVars& d, Tape::Var x);

// ---- plain (tape-free) forward passes, for sampling and evaluation -------

std::vector<double> generate_values(const GeneratorParams& g, const Tensor& z,
                                    const std::vector<int>& y);

}  // namespace p2bench
