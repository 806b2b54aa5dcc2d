#pragma once

#include <vector>

#include "triclust/rng.hpp"

namespace triclust {

// Label-noise control for triplet sampling. pos_noise is the probability
// that the positive comes from a wrong class, neg_noise the probability that
// the negative comes from the anchor's own class. neg_random draws negatives
// uniformly ignoring labels (neg_noise is then ignored).
struct NoiseSpec {
    double pos_noise = 0.0;
    double neg_noise = 0.0;
    bool neg_random = false;

    NoiseSpec() = default;
    NoiseSpec(double pos, double neg, bool random_neg = false);
};

struct Triplet {
    int anchor;
    int positive;
    int negative;
    bool pos_corrupted;  // label(positive) != label(anchor)
    bool neg_corrupted;  // label(negative) == label(anchor)
};

class TripletSampler {
public:
    explicit TripletSampler(std::vector<int> labels);

    Triplet sample_triplet(int anchor, const NoiseSpec& spec, Rng& rng) const;
    // anchors drawn uniformly with replacement
    std::vector<Triplet> sample_batch(int batch_size, const NoiseSpec& spec, Rng& rng) const;

    int size() const { return static_cast<int>(labels_.size()); }
    int class_count() const { return static_cast<int>(by_class_.size()); }
    const std::vector<int>& labels() const { return labels_; }

private:
    std::vector<int> labels_;
    std::vector<std::vector<int>> by_class_;
};

}  // namespace triclust
