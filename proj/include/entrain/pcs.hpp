#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "entrain/corpus.hpp"
#include "entrain/error.hpp"
#include "entrain/stats.hpp"

namespace entrain::pcs {

inline constexpr double kDefaultLowThreshold = 0.6;
inline constexpr double kDefaultHighThreshold = 0.9;
inline constexpr double kLoadingThreshold = 0.4;

// ---------------------------------------------------------------------------
// construct registry
// ---------------------------------------------------------------------------

/// Ordered construct names plus their declared rating scales. The scale
/// per construct is configuration, not inference; the defaults below can
/// be overridden from the run config.
struct ConstructSet {
    std::vector<std::string> names;
    std::map<std::string, double> scales;  // construct -> max rating

    /// The 11 success constructs scored by default.
    static ConstructSet pcs_default() {
        ConstructSet c;
        c.names = {"Affect",          "Overall affect",   "Affect at beginning",
                   "Affect at middle", "Affect at end",   "Best affect",
                   "How much enjoyable", "I like you",    "You like me",
                   "Conversationalist", "My friends like you"};
        for (const auto& n : c.names) c.scales[n] = 9.0;
        c.scales["How much enjoyable"] = 100.0;
        c.scales["Conversationalist"] = 100.0;
        c.scales["I like you"] = 7.0;
        c.scales["You like me"] = 7.0;
        c.scales["My friends like you"] = 7.0;
        return c;
    }

    /// The wider 21-construct instrument used at model-fit time: the 11
    /// success constructs plus 10 common-ground items.
    static ConstructSet survey_full() {
        ConstructSet c = pcs_default();
        const std::vector<std::string> common_ground = {
            "In common",
            "Good for advice",
            "Our thoughts synced up",
            "Developed joint perspective",
            "Shared our thoughts",
            "Discussed real things",
            "Thoughts became more alike",
            "Anticipated each other",
            "Became certain of perception",
            "Saw world in same way"};
        for (const auto& n : common_ground) {
            c.names.push_back(n);
            c.scales[n] = 7.0;
        }
        return c;
    }
};

// ---------------------------------------------------------------------------
// model fitting
// ---------------------------------------------------------------------------

struct PcsModel {
    std::vector<std::string> constructs;   // fit-time construct order
    std::vector<double> loadings_pc1;      // correlation loadings
    std::vector<double> loadings_pc2;
    double explained_pc1 = 0.0;
    double explained_pc2 = 0.0;
    std::vector<std::string> retained;     // |loading_pc1| > 0.4
};

inline constexpr std::size_t kMinFitResponses = 50;

/// Fit the success model: 2-component correlation PCA over complete
/// responses, retaining constructs whose component-1 loading magnitude
/// exceeds 0.4. Throws DegenerateMatrix when the cohort has no second
/// dimension (rank-1 ratings).
inline PcsModel fit_pcs_model(const std::vector<corpus::SurveyResponse>& responses,
                              const ConstructSet& constructs,
                              std::size_t min_responses = kMinFitResponses) {
    std::vector<const corpus::SurveyResponse*> complete;
    for (const auto& r : responses) {
        bool ok = true;
        for (const auto& name : constructs.names)
            if (!r.ratings.count(name)) { ok = false; break; }
        if (ok) complete.push_back(&r);
    }
    if (complete.size() < min_responses)
        throw Error(ErrorCode::TooFewResponses,
                    std::to_string(complete.size()) + " complete responses, need " +
                        std::to_string(min_responses));

    const std::size_t n = complete.size(), p = constructs.names.size();
    stats::Matrix data(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            data(i, j) = complete[i]->ratings.at(constructs.names[j]);

    const auto fit = stats::pca(data, 2);
    if (fit.explained_variance[1] < 1e-9)
        throw Error(ErrorCode::DegenerateMatrix, "cohort ratings are rank-1");

    PcsModel model;
    model.constructs = constructs.names;
    model.explained_pc1 = fit.explained_variance[0];
    model.explained_pc2 = fit.explained_variance[1];
    for (std::size_t j = 0; j < p; ++j) {
        model.loadings_pc1.push_back(fit.loadings(j, 0));
        model.loadings_pc2.push_back(fit.loadings(j, 1));
        if (std::fabs(fit.loadings(j, 0)) > kLoadingThreshold)
            model.retained.push_back(constructs.names[j]);
    }
    return model;
}

// ---------------------------------------------------------------------------
// scoring
// ---------------------------------------------------------------------------

enum class SuccessLabel { LSC, HSC, excluded };

inline const char* label_name(SuccessLabel l) {
    switch (l) {
        case SuccessLabel::LSC: return "LSC";
        case SuccessLabel::HSC: return "HSC";
        case SuccessLabel::excluded: return "excluded";
    }
    return "?";
}

struct PcsRecord {
    corpus::SpeakerId participant;
    std::string conversation_id;
    double pcs = 0.0;               // in [0, 1]
    double conversation_pcs = 0.0;  // in [0, 1]
    SuccessLabel label = SuccessLabel::excluded;
};

/// How the two participant scores combine into a conversation score.
enum class ConversationCombine { mean, min };

struct ScoreOptions {
    double low_threshold = kDefaultLowThreshold;
    double high_threshold = kDefaultHighThreshold;
    ConversationCombine combine = ConversationCombine::mean;
};

struct LabelCounts {
    std::size_t lsc = 0;
    std::size_t hsc = 0;
    std::size_t excluded = 0;
};

/// Apply the LSC / HSC thresholds to already-scored records.
inline LabelCounts label_groups(std::vector<PcsRecord>& records,
                                double low = kDefaultLowThreshold,
                                double high = kDefaultHighThreshold) {
    LabelCounts counts;
    std::set<std::string> seen;
    for (auto& r : records) {
        if (r.conversation_pcs <= low) r.label = SuccessLabel::LSC;
        else if (r.conversation_pcs >= high) r.label = SuccessLabel::HSC;
        else r.label = SuccessLabel::excluded;
        if (seen.insert(r.conversation_id).second) {
            if (r.label == SuccessLabel::LSC) ++counts.lsc;
            else if (r.label == SuccessLabel::HSC) ++counts.hsc;
            else ++counts.excluded;
        }
    }
    return counts;
}

struct ScoreOutcome {
    std::vector<PcsRecord> records;
    double rescale_lo = 0.0;  // cohort min / max of the mean construct
    double rescale_hi = 0.0;  // z-score, i.e. the [0, 1] mapping bounds
};

/// Score every response: per construct, z-score across the cohort
/// (population sd; a near-constant construct contributes zeros); per
/// participant, the mean of construct z-scores; then one cohort-wide
/// min-max rescale into [0, 1]. Conversation scores combine the
/// participants' values and set the LSC / HSC / excluded label.
inline ScoreOutcome score_pcs_full(
    const std::vector<corpus::SurveyResponse>& responses,
    const std::vector<std::string>& retained,
    const ScoreOptions& opt = {}) {
    if (responses.size() < 2)
        throw Error(ErrorCode::SingleResponseCohort,
                    "cohort of " + std::to_string(responses.size()));
    if (retained.empty())
        throw Error(ErrorCode::MissingConstruct, "no retained constructs");
    for (const auto& r : responses)
        for (const auto& name : retained)
            if (!r.ratings.count(name))
                throw Error(ErrorCode::MissingConstruct,
                            name + " missing for participant " + r.participant +
                                " in " + r.conversation_id);

    const std::size_t n = responses.size();
    std::vector<double> score(n, 0.0);
    for (const auto& name : retained) {
        double sum = 0.0;
        for (const auto& r : responses) sum += r.ratings.at(name);
        const double mu = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& r : responses) {
            const double d = r.ratings.at(name) - mu;
            ss += d * d;
        }
        const double var = ss / static_cast<double>(n);
        if (var < 1e-9) continue;  // degenerate construct: zero contribution
        const double inv_sd = 1.0 / std::sqrt(var);
        for (std::size_t i = 0; i < n; ++i)
            score[i] += (responses[i].ratings.at(name) - mu) * inv_sd;
    }
    for (double& s : score) s /= static_cast<double>(retained.size());

    const auto [lo_it, hi_it] = std::minmax_element(score.begin(), score.end());
    const double lo = *lo_it, hi = *hi_it;
    ScoreOutcome outcome;
    outcome.rescale_lo = lo;
    outcome.rescale_hi = hi;
    std::vector<PcsRecord> records(n);
    for (std::size_t i = 0; i < n; ++i) {
        records[i].participant = responses[i].participant;
        records[i].conversation_id = responses[i].conversation_id;
        records[i].pcs = (hi - lo > 1e-12) ? (score[i] - lo) / (hi - lo) : 0.5;
    }

    std::map<std::string, std::vector<std::size_t>> by_conv;
    for (std::size_t i = 0; i < n; ++i)
        by_conv[records[i].conversation_id].push_back(i);
    for (const auto& [conv, idx] : by_conv) {
        (void)conv;
        double conv_pcs;
        if (opt.combine == ConversationCombine::mean) {
            double s = 0.0;
            for (auto i : idx) s += records[i].pcs;
            conv_pcs = s / static_cast<double>(idx.size());
        } else {
            conv_pcs = records[idx.front()].pcs;
            for (auto i : idx) conv_pcs = std::min(conv_pcs, records[i].pcs);
        }
        for (auto i : idx) records[i].conversation_pcs = conv_pcs;
    }

    std::sort(records.begin(), records.end(), [](const PcsRecord& a, const PcsRecord& b) {
        if (a.conversation_id != b.conversation_id)
            return a.conversation_id < b.conversation_id;
        return a.participant < b.participant;
    });
    label_groups(records, opt.low_threshold, opt.high_threshold);
    outcome.records = std::move(records);
    return outcome;
}

inline std::vector<PcsRecord> score_pcs(
    const std::vector<corpus::SurveyResponse>& responses,
    const std::vector<std::string>& retained,
    const ScoreOptions& opt = {}) {
    return score_pcs_full(responses, retained, opt).records;
}

} // namespace entrain::pcs
