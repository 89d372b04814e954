#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "emca/ca.hpp"
#include "emca/rng.hpp"

namespace emca {

// How the leak rate enters the state update. The update as usually written,
// r' = (1-beta)*r + beta*tanh(W_h r + W_in x), freezes the state at beta = 0,
// while beta = 0 is the reported working setting; `experiment` therefore
// substitutes beta_effective = 1 - beta, making beta = 0 the pure tanh update.
// `literal` applies the equation as written.
enum class LeakConvention { experiment, literal };

struct EsnParams {
    int size = 1800;
    double spectral_radius = 0.9;
    double leak = 0.0;
    double nonzeros_per_row = 10.0;
    LeakConvention convention = LeakConvention::experiment;
    uint64_t seed = 1;
};

// Frozen reservoir: sparse recurrent matrix in CSR form plus a dense input map.
struct Esn {
    EsnParams params;
    int input_dim = 0;
    std::vector<int32_t> row_start;
    std::vector<int32_t> col;
    std::vector<double> val;
    std::vector<double> w_in;      // size x input_dim, row-major
    double raw_radius = 0.0;       // radius estimate of the unscaled matrix
    bool radius_fallback = false;  // estimate fell back to the row-sum bound
};

// Recurrent entries drawn Bernoulli(nonzeros_per_row / size) each, values
// uniform(-1,1), then rescaled so the spectral radius matches the target.
// Non-convergence of the radius estimate falls back to largest-row-sum / 1.25
// and sets radius_fallback.
Esn esn_init(const EsnParams& p, int input_dim);

struct RadiusEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Growth-rate power iteration on the stored matrix: running geometric mean of
// per-step norm growth, tolerance 1e-6, capped at 1000 iterations.
RadiusEstimate estimate_spectral_radius(const Esn& esn, uint64_t probe_seed = 1);

// State after each input; the state starts at zero unless r0 is given.
std::vector<std::vector<double>> esn_run(const Esn& esn,
                                         const std::vector<std::vector<double>>& inputs,
                                         const std::vector<double>& r0 = {});
// Fast path for one-hot inputs given as token ids.
std::vector<std::vector<double>> esn_run_tokens(const Esn& esn, const std::vector<int>& tokens,
                                                const std::vector<double>& r0 = {});

// ---- input projections for CA reservoirs ----

enum class ProjectionKind { one_to_one, one_to_many, one_to_pattern };

// Maps each input bit to k target cells, disjoint within each of `copies`
// independently drawn layouts laid side by side; total width = copies *
// copy_width. one_to_one places single cells (k = 1), one_to_many k scattered
// cells, one_to_pattern a contiguous run of k cells inside the bit's slot.
struct Projection {
    ProjectionKind kind = ProjectionKind::one_to_one;
    int k = 1;
    int copies = 1;
    int input_dim = 0;
    int copy_width = 0;
    std::vector<std::vector<int32_t>> targets;  // [copy][bit * k + j], global cell indices

    int width() const { return copies * copy_width; }
};

Projection build_projection(ProjectionKind kind, int k, int copies, int input_dim,
                            int copy_width, uint64_t seed);

// OR of the targets of every set input bit, as a dense 0/1 row of width()
std::vector<uint8_t> project(const Projection& proj, const std::vector<uint8_t>& bits);

// ---- CA reservoirs ----

struct RecaConfig {
    RuleTable rule;           // binary 1D
    int steps_per_token = 2;  // rule applications recorded per token
    Projection projection;
};

int reca_feature_dim(const RecaConfig& cfg);

// Per token: XOR the projected one-hot input into the CA state, then apply the
// rule steps_per_token times, recording each state; the feature is the
// concatenation of the recorded states (substep s offset by s * width), given
// as the indices of its set bits. State carries over between tokens.
std::vector<std::vector<int32_t>> reca_run(const RecaConfig& cfg, const std::vector<int>& tokens);

// Binary radius-1 rule with one virtual input cell per neighborhood:
// outputs[input*8 + left*4 + center*2 + right].
struct ExtendedRule {
    std::array<uint8_t, 16> outputs{};

    // both table halves identical: the update never reads the input
    bool ignores_input() const;
};

// The extended rule that XORs the input bit into the cell it lands on before
// the base rule fires: psi(l, c, r, p) = phi(l, c xor p, r).
ExtendedRule extended_from(const RuleTable& rule);

struct ExtendedRecaConfig {
    ExtendedRule rule;
    int steps_per_token = 2;
    Projection projection;
};

int extended_reca_feature_dim(const ExtendedRecaConfig& cfg);

// Like reca_run, but the input enters through the rule's virtual cell during
// the first of the steps_per_token applications instead of a separate XOR.
std::vector<std::vector<int32_t>> extended_reca_run(const ExtendedRecaConfig& cfg,
                                                    const std::vector<int>& tokens);

// ---- linear softmax decoder ----

struct DecoderConfig {
    double learn_rate = 0.001;
    double weight_decay = 0.001;
};

// Readout trained with per-position SGD on cross-entropy. Weight decay is
// folded into `scale`, so steps on sparse binary features only touch the
// columns they activate; logical weights are scale * w.
struct Decoder {
    int vocab = 0;
    int feature_dim = 0;
    double scale = 1.0;
    std::vector<double> w;  // vocab x feature_dim, row-major
    std::vector<double> b;
};

Decoder make_decoder(int vocab, int feature_dim);

std::vector<double> decoder_logits(const Decoder& d, const std::vector<double>& feature);
std::vector<double> decoder_logits(const Decoder& d, const std::vector<float>& feature);
std::vector<double> decoder_logits(const Decoder& d, const std::vector<int32_t>& active);

// argmax with ties broken toward the lowest token id
int decoder_predict(const Decoder& d, const std::vector<double>& feature);
int decoder_predict(const Decoder& d, const std::vector<float>& feature);
int decoder_predict(const Decoder& d, const std::vector<int32_t>& active);

void decoder_train_step(Decoder& d, const std::vector<double>& feature, int target,
                        const DecoderConfig& cfg);
void decoder_train_step(Decoder& d, const std::vector<int32_t>& active, int target,
                        const DecoderConfig& cfg);

}  // namespace emca
