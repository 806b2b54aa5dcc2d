#include "triclust/sampling.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace triclust {

NoiseSpec::NoiseSpec(double pos, double neg, bool random_neg)
    : pos_noise(pos), neg_noise(neg), neg_random(random_neg) {
    if (pos_noise < 0.0 || pos_noise > 1.0) throw std::invalid_argument("NoiseSpec: pos_noise outside [0,1]");
    if (neg_noise < 0.0 || neg_noise > 1.0) throw std::invalid_argument("NoiseSpec: neg_noise outside [0,1]");
}

TripletSampler::TripletSampler(std::vector<int> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("TripletSampler: empty label array");
    const int max_label = *std::max_element(labels_.begin(), labels_.end());
    const int min_label = *std::min_element(labels_.begin(), labels_.end());
    if (min_label < 0) throw std::invalid_argument("TripletSampler: negative label");
    by_class_.resize(max_label + 1);
    for (int i = 0; i < static_cast<int>(labels_.size()); ++i) by_class_[labels_[i]].push_back(i);
}

Triplet TripletSampler::sample_triplet(int anchor, const NoiseSpec& spec, Rng& rng) const {
    const int n = size();
    if (anchor < 0 || anchor >= n) throw std::invalid_argument("sample_triplet: anchor out of range");
    const int anchor_label = labels_[anchor];
    const auto& same = by_class_[anchor_label];
    const int same_count = static_cast<int>(same.size());
    const int other_count = n - same_count;
    if (same_count < 2)
        throw std::runtime_error("sample_triplet: anchor class " + std::to_string(anchor_label) +
                                 " has a single member, no positive exists");

    // positive: same class unless the draw corrupts it
    const bool corrupt_pos = rng.uniform() < spec.pos_noise;
    int positive;
    if (corrupt_pos) {
        if (other_count == 0)
            throw std::runtime_error("sample_triplet: no other class to draw a corrupted positive from");
        do {
            positive = rng.index(n);
        } while (labels_[positive] == anchor_label);
    } else {
        do {
            positive = same[rng.index(same_count)];
        } while (positive == anchor);
    }

    // negative: uniform over everything (neg_random), else other class unless
    // the draw corrupts it into the anchor's own class
    int negative;
    if (spec.neg_random) {
        if (n < 3) throw std::runtime_error("sample_triplet: need at least 3 samples");
        do {
            negative = rng.index(n);
        } while (negative == anchor || negative == positive);
    } else {
        const bool corrupt_neg = rng.uniform() < spec.neg_noise;
        if (corrupt_neg) {
            const int candidates = same_count - 1 - (labels_[positive] == anchor_label ? 1 : 0);
            if (candidates <= 0)
                throw std::runtime_error("sample_triplet: anchor class too small for a same-class negative");
            do {
                negative = same[rng.index(same_count)];
            } while (negative == anchor || negative == positive);
        } else {
            const int candidates = other_count - (labels_[positive] != anchor_label ? 1 : 0);
            if (candidates <= 0)
                throw std::runtime_error("sample_triplet: no other-class sample left for the negative");
            do {
                negative = rng.index(n);
            } while (labels_[negative] == anchor_label || negative == positive);
        }
    }

    Triplet t;
    t.anchor = anchor;
    t.positive = positive;
    t.negative = negative;
    t.pos_corrupted = labels_[positive] != anchor_label;
    t.neg_corrupted = labels_[negative] == anchor_label;
    return t;
}

std::vector<Triplet> TripletSampler::sample_batch(int batch_size, const NoiseSpec& spec, Rng& rng) const {
    if (batch_size < 0) throw std::invalid_argument("sample_batch: negative batch size");
    std::vector<Triplet> batch;
    batch.reserve(batch_size);
    for (int b = 0; b < batch_size; ++b) {
        const int anchor = rng.index(size());
        batch.push_back(sample_triplet(anchor, spec, rng));
    }
    return batch;
}

}  // namespace triclust
