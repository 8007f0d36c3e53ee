#include "p2bench/models.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

namespace p2bench {

namespace {

// pre-sigmoid value giving lambda = 0.999; exact 1 would make -log(lambda)
// penalties degenerate
constexpr double kGateScalarInit = 6.906754778648554;

void glorot_fill(Tensor& t, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
    for (double& x : t.data) x = rng.uniform(-a, a);
}

nlohmann::json tensor_to_json(const Tensor& t) {
    return {{"shape", t.shape}, {"data", t.data}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
    Tensor t;
    t.shape = j.at("shape").get<std::vector<std::size_t>>();
    t.data = j.at("data").get<std::vector<double>>();
    std::size_t n = 1;
    for (std::size_t d : t.shape) n *= d;
    if (t.shape.empty() || n != t.data.size())
        throw std::invalid_argument("tensor json: shape/data mismatch");
    return t;
}

nlohmann::json params_json(const std::vector<NamedParam>& params) {
    nlohmann::json j;
    for (const NamedParam& p : params) j[p.name] = tensor_to_json(*p.tensor);
    return j;
}

void params_from_json(const nlohmann::json& j, const std::vector<NamedParam>& params) {
    for (const NamedParam& p : params) *p.tensor = tensor_from_json(j.at(p.name));
}

}  // namespace

std::vector<NamedParam> param_list(GeneratorParams& g) {
    std::vector<NamedParam> out;
    out.push_back({"emb", &g.emb});
    out.push_back({"w1", &g.w1});
    out.push_back({"b1", &g.b1});
    out.push_back({"w2", &g.w2});
    out.push_back({"b2", &g.b2});
    out.push_back({"w3", &g.w3});
    out.push_back({"b3", &g.b3});
    return out;
}

std::vector<NamedParam> param_list(DiscriminatorParams& d) {
    std::vector<NamedParam> out;
    out.push_back({"t_w1", &d.t_w1});
    out.push_back({"t_b1", &d.t_b1});
    out.push_back({"t_w2", &d.t_w2});
    out.push_back({"t_b2", &d.t_b2});
    out.push_back({"Vp", &d.Vp});
    out.push_back({"Vq", &d.Vq});
    out.push_back({"Vtied", &d.Vtied});
    out.push_back({"psi_w", &d.psi_w});
    out.push_back({"psi_b", &d.psi_b});
    out.push_back({"unc_w", &d.unc_w});
    out.push_back({"unc_b", &d.unc_b});
    out.push_back({"gate_w", &d.gate_w});
    out.push_back({"gate_b", &d.gate_b});
    out.push_back({"gate_scalar", &d.gate_scalar});
    return out;
}

GeneratorParams init_generator(std::size_t num_classes, Rng& rng, std::size_t noise_dim,
                               std::size_t emb_dim, std::size_t hidden) {
    GeneratorParams g;
    g.noise.dim = noise_dim;
    g.emb = Tensor(num_classes, emb_dim);
    g.w1 = Tensor(noise_dim + emb_dim, hidden);
    g.b1 = Tensor(1, hidden);
    g.w2 = Tensor(hidden, hidden);
    g.b2 = Tensor(1, hidden);
    g.w3 = Tensor(hidden, 1);
    g.b3 = Tensor(1, 1);
    glorot_fill(g.emb, rng);
    glorot_fill(g.w1, rng);
    glorot_fill(g.w2, rng);
    glorot_fill(g.w3, rng);
    return g;
}

DiscriminatorParams init_discriminator(std::size_t num_classes, Rng& rng, std::size_t hidden) {
    DiscriminatorParams d;
    d.t_w1 = Tensor(1, hidden);
    d.t_b1 = Tensor(1, hidden);
    d.t_w2 = Tensor(hidden, hidden);
    d.t_b2 = Tensor(1, hidden);
    d.Vp = Tensor(num_classes, hidden);
    d.Vq = Tensor(num_classes, hidden);
    d.Vtied = Tensor(num_classes, hidden);
    d.psi_w = Tensor(hidden, 1);
    d.psi_b = Tensor(1, 1);
    d.unc_w = Tensor(hidden, 1);
    d.unc_b = Tensor(1, 1);
    d.gate_w = Tensor(hidden, 1);
    d.gate_b = Tensor(1, 1);
    d.gate_scalar = Tensor(1, 1);
    glorot_fill(d.t_w1, rng);
    glorot_fill(d.t_w2, rng);
    glorot_fill(d.Vp, rng);
    glorot_fill(d.Vq, rng);
    glorot_fill(d.Vtied, rng);
    glorot_fill(d.psi_w, rng);
    glorot_fill(d.unc_w, rng);
    glorot_fill(d.gate_w, rng);
    // gate starts nearly open so weighted variants begin with full
    // classification weight
    d.gate_b.data[0] = kGateScalarInit;
    d.gate_scalar.data[0] = kGateScalarInit;
    return d;
}

std::string params_to_json(GeneratorParams& g) { return params_json(param_list(g)).dump(); }

GeneratorParams generator_from_json(const std::string& text) {
    GeneratorParams g;
    params_from_json(nlohmann::json::parse(text), param_list(g));
    g.noise.dim = g.w1.rows() - g.emb.cols();
    return g;
}

std::string params_to_json(DiscriminatorParams& d) { return params_json(param_list(d)).dump(); }

DiscriminatorParams discriminator_from_json(const std::string& text) {
    DiscriminatorParams d;
    params_from_json(nlohmann::json::parse(text), param_list(d));
    return d;
}

std::uint64_t param_digest(const std::vector<NamedParam>& params) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* bytes, std::size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(bytes);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    for (const NamedParam& p : params) {
        mix(p.name.data(), p.name.size());
        mix(p.tensor->data.data(), p.tensor->data.size() * sizeof(double));
    }
    return h;
}

// ---- tape bindings -------------------------------------------------------

GenVars bind(Tape& tape, const GeneratorParams& g, bool trainable) {
    GenVars v;
    v.emb = tape.leaf(g.emb, trainable);
    v.w1 = tape.leaf(g.w1, trainable);
    v.b1 = tape.leaf(g.b1, trainable);
    v.w2 = tape.leaf(g.w2, trainable);
    v.b2 = tape.leaf(g.b2, trainable);
    v.w3 = tape.leaf(g.w3, trainable);
    v.b3 = tape.leaf(g.b3, trainable);
    return v;
}

DiscVars bind(Tape& tape, const DiscriminatorParams& d, bool trainable) {
    DiscVars v;
    v.t_w1 = tape.leaf(d.t_w1, trainable);
    v.t_b1 = tape.leaf(d.t_b1, trainable);
    v.t_w2 = tape.leaf(d.t_w2, trainable);
    v.t_b2 = tape.leaf(d.t_b2, trainable);
    v.Vp = tape.leaf(d.Vp, trainable);
    v.Vq = tape.leaf(d.Vq, trainable);
    v.Vtied = tape.leaf(d.Vtied, trainable);
    v.psi_w = tape.leaf(d.psi_w, trainable);
    v.psi_b = tape.leaf(d.psi_b, trainable);
    v.unc_w = tape.leaf(d.unc_w, trainable);
    v.unc_b = tape.leaf(d.unc_b, trainable);
    v.gate_w = tape.leaf(d.gate_w, trainable);
    v.gate_b = tape.leaf(d.gate_b, trainable);
    v.gate_scalar = tape.leaf(d.gate_scalar, trainable);
    return v;
}

Tape::Var generate(Tape& tape, const GenVars& g, Tape::Var z, const std::vector<int>& y) {
    Tape::Var e = tape.gather_rows(g.emb, y);
    Tape::Var h = tape.concat_cols(z, e);
    h = tape.relu(tape.add(tape.matmul(h, g.w1), g.b1));
    h = tape.relu(tape.add(tape.matmul(h, g.w2), g.b2));
    return tape.add(tape.matmul(h, g.w3), g.b3);
}

Tape::Var embed(Tape& tape, const DiscVars& d, Tape::Var x) {
    Tape::Var h = tape.relu(tape.add(tape.matmul(x, d.t_w1), d.t_b1));
    return tape.relu(tape.add(tape.matmul(h, d.t_w2), d.t_b2));
}

namespace {

Tape::Var psi_of_phi(Tape& tape, const DiscVars& d, Tape::Var phi) {
    return tape.add(tape.matmul(phi, d.psi_w), d.psi_b);
}

// per-sample inner product between gathered class embeddings and phi rows
Tape::Var class_dot(Tape& tape, Tape::Var embeddings, Tape::Var phi, const std::vector<int>& y) {
    Tape::Var rows = tape.gather_rows(embeddings, y);
    return tape.sum_rows(tape.mul(rows, phi));
}

}  // namespace

Tape::Var dual_proj_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi,
                              const std::vector<int>& y) {
    Tape::Var proj = tape.sub(class_dot(tape, d.Vp, phi, y), class_dot(tape, d.Vq, phi, y));
    return tape.add(proj, psi_of_phi(tape, d, phi));
}

Tape::Var proj_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi, const std::vector<int>& y,
                         bool with_psi) {
    Tape::Var proj = class_dot(tape, d.Vtied, phi, y);
    if (!with_psi) return proj;
    return tape.add(proj, psi_of_phi(tape, d, phi));
}

Tape::Var uncond_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi) {
    return tape.add(tape.matmul(phi, d.unc_w), d.unc_b);
}

Tape::Var log_posterior_phi(Tape& tape, const DiscVars& d, Head head, Tape::Var phi) {
    Tape::Var logits = tape.matmul_nt(phi, head == Head::P ? d.Vp : d.Vq);  // n x K
    Tape::Var lse = tape.logsumexp_rows(logits);                            // n x 1
    // subtract the row logsumexp from every column
    const std::size_t k = tape.value(logits).cols();
    Tensor ones(1, k, 1.0);
    Tape::Var spread = tape.matmul(lse, tape.constant(ones));  // n x K
    return tape.sub(logits, spread);
}

Tape::Var gate_logit_phi(Tape& tape, const DiscVars& d, Tape::Var phi) {
    return tape.add(tape.matmul(phi, d.gate_w), d.gate_b);
}

Tape::Var gate_phi(Tape& tape, const DiscVars& d, Tape::Var phi) {
    return tape.sigmoid(gate_logit_phi(tape, d, phi));
}

Tape::Var dual_proj_logit(Tape& tape, const DiscVars& d, Tape::Var x, const std::vector<int>& y) {
    return dual_proj_logit_phi(tape, d, embed(tape, d, x), y);
}
Tape::Var proj_logit(Tape& tape, const DiscVars& d, Tape::Var x, const std::vector<int>& y) {
    return proj_logit_phi(tape, d, embed(tape, d, x), y);
}
Tape::Var uncond_logit(Tape& tape, const DiscVars& d, Tape::Var x) {
    return uncond_logit_phi(tape, d, embed(tape, d, x));
}
Tape::Var log_posterior(Tape& tape, const DiscVars& d, Head head, Tape::Var x) {
    return log_posterior_phi(tape, d, head, embed(tape, d, x));
}
Tape::Var gate(Tape& tape, const DiscVars& d, Tape::Var x) {
    return gate_phi(tape, d, embed(tape, d, x));
}

// ---- plain forward -------------------------------------------------------

std::vector<double> generate_values(const GeneratorParams& g, const Tensor& z,
                                    const std::vector<int>& y) {
    const std::size_t n = z.rows();
    if (y.size() != n) throw std::invalid_argument("generate_values: label count mismatch");
    const std::size_t nz = z.cols(), ne = g.emb.cols(), h = g.w1.cols();
    std::vector<double> in(nz + ne), h1(h), h2(h), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = y[i];
        if (label < 0 || static_cast<std::size_t>(label) >= g.emb.rows())
            throw std::invalid_argument("generate_values: invalid class");
        for (std::size_t j = 0; j < nz; ++j) in[j] = z.at(i, j);
        for (std::size_t j = 0; j < ne; ++j)
            in[nz + j] = g.emb.at(static_cast<std::size_t>(label), j);
        for (std::size_t c = 0; c < h; ++c) {
            double s = g.b1.data[c];
            for (std::size_t r = 0; r < nz + ne; ++r) s += in[r] * g.w1.at(r, c);
            h1[c] = s > 0.0 ? s : 0.0;
        }
        for (std::size_t c = 0; c < h; ++c) {
            double s = g.b2.data[c];
            for (std::size_t r = 0; r < h; ++r) s += h1[r] * g.w2.at(r, c);
            h2[c] = s > 0.0 ? s : 0.0;
        }
        double s = g.b3.data[0];
        for (std::size_t r = 0; r < h; ++r) s += h2[r] * g.w3.at(r, 0);
        out[i] = s;
    }
    return out;
}

}  // namespace p2bench
