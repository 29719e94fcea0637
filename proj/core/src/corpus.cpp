// SPDX-License-Identifier: Apache-2.0

#include <robforge/corpus.hpp>

#include <algorithm>
#include <random>
#include <set>

#include <robforge/jsonl.hpp>

namespace robforge {

namespace {

void validate_docs(std::vector<TrialDocument>& docs) {
    std::set<std::string> seen;
    for (const auto& d : docs) {
        if (d.trial_id.empty()) throw MalformedRecord(d.trial_id, "empty trial_id");
        if (d.body.empty()) throw EmptyBody(d.trial_id);
        if (!seen.insert(d.trial_id).second) throw DuplicateTrialId(d.trial_id);
    }
    std::sort(docs.begin(), docs.end(),
              [](const TrialDocument& a, const TrialDocument& b) { return a.trial_id < b.trial_id; });
}

TrainingExample example_from_json(const nlohmann::json& rec, const std::string& where) {
    for (const char* field :
         {"domain", "excerpt", "evidence_question", "evidence_span", "evaluative_question", "label",
          "justification"}) {
        if (!rec.contains(field)) throw MalformedRecord(where, std::string("missing field ") + field);
    }
    TrainingExample ex;
    ex.domain = parse_domain(rec.at("domain").get<std::string>());
    ex.excerpt = rec.at("excerpt").get<std::string>();
    ex.evidence_question = rec.at("evidence_question").get<std::string>();
    ex.evidence_span = rec.at("evidence_span").get<std::string>();
    ex.evaluative_question = rec.at("evaluative_question").get<std::string>();
    ex.label = parse_label(rec.at("label").get<std::string>());
    ex.justification = rec.at("justification").get<std::string>();
    if (ex.excerpt.empty() || ex.evidence_question.empty() || ex.evidence_span.empty() ||
        ex.evaluative_question.empty() || ex.justification.empty()) {
        throw MalformedRecord(where, "empty text field in training example");
    }
    ex.span_non_literal = ex.excerpt.find(ex.evidence_span) == std::string::npos;
    return ex;
}

}  // namespace

std::vector<TrialDocument> load_corpus(const std::filesystem::path& path) {
    std::vector<TrialDocument> docs;
    if (std::filesystem::is_directory(path)) {
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
            TrialDocument doc;
            doc.trial_id = entry.path().stem().string();
            doc.body = read_file(entry.path());
            docs.push_back(std::move(doc));
        }
    } else {
        auto records = read_jsonl(path);
        std::size_t n = 0;
        for (const auto& rec : records) {
            ++n;
            std::string where = path.string() + "#" + std::to_string(n);
            if (!rec.contains("trial_id") || !rec.contains("body")) {
                throw MalformedRecord(where, "trial record needs trial_id and body");
            }
            TrialDocument doc;
            doc.trial_id = rec.at("trial_id").get<std::string>();
            doc.body = rec.at("body").get<std::string>();
            if (rec.contains("meta")) {
                for (const auto& [k, v] : rec.at("meta").items()) {
                    doc.source_meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
                }
            }
            docs.push_back(std::move(doc));
        }
    }
    validate_docs(docs);
    return docs;
}

void write_corpus(const std::filesystem::path& path, const std::vector<TrialDocument>& docs) {
    std::vector<nlohmann::json> records;
    records.reserve(docs.size());
    for (const auto& d : docs) {
        nlohmann::json rec{{"trial_id", d.trial_id}, {"body", d.body}};
        if (!d.source_meta.empty()) rec["meta"] = d.source_meta;
        records.push_back(std::move(rec));
    }
    write_jsonl(path, records);
}

std::vector<GoldLabelSet> load_gold(const std::filesystem::path& path) {
    auto records = read_jsonl(path);
    std::vector<GoldLabelSet> golds;
    std::set<std::string> seen;
    std::size_t n = 0;
    for (const auto& rec : records) {
        ++n;
        std::string where = path.string() + "#" + std::to_string(n);
        if (!rec.contains("trial_id") || !rec.contains("labels")) {
            throw MalformedRecord(where, "gold record needs trial_id and labels");
        }
        GoldLabelSet g;
        g.trial_id = rec.at("trial_id").get<std::string>();
        if (!seen.insert(g.trial_id).second) throw DuplicateTrialId(g.trial_id);
        const auto& labels = rec.at("labels");
        for (RobDomain d : kAllDomains) {
            std::string code = to_string(d);
            if (!labels.contains(code)) throw MissingDomain(g.trial_id, code);
            g.labels[d] = parse_label(labels.at(code).get<std::string>());
        }
        golds.push_back(std::move(g));
    }
    return golds;
}

std::vector<TrainingExample> load_examples(const std::filesystem::path& path) {
    auto records = read_jsonl(path);
    std::vector<TrainingExample> out;
    std::size_t n = 0;
    for (const auto& rec : records) {
        ++n;
        out.push_back(example_from_json(rec, path.string() + "#" + std::to_string(n)));
    }
    return out;
}

DatasetSplit build_split(RobDomain domain, const std::vector<TrainingExample>& pool,
                         std::uint64_t seed) {
    constexpr int kTrainPerLabel = 6;
    constexpr int kValPerLabel = 4;
    constexpr int kNeedPerLabel = kTrainPerLabel + kValPerLabel;

    std::map<RiskLabel, std::vector<TrainingExample>> by_label;
    for (const auto& ex : pool) {
        if (ex.domain == domain) by_label[ex.label].push_back(ex);
    }
    for (RiskLabel label : kAllLabels) {
        auto have = static_cast<int>(by_label[label].size());
        if (have < kNeedPerLabel) throw InsufficientExamples(to_string(label), have, kNeedPerLabel);
    }

    DatasetSplit split;
    split.domain = domain;
    for (RiskLabel label : kAllLabels) {
        auto& bucket = by_label[label];
        // Per-label generator keeps the draw independent of the other labels'
        // pool sizes.
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(label) + 1)));
        std::shuffle(bucket.begin(), bucket.end(), rng);
        for (int i = 0; i < kTrainPerLabel; ++i) split.train.push_back(bucket[static_cast<std::size_t>(i)]);
        for (int i = 0; i < kValPerLabel; ++i) {
            split.validation.push_back(bucket[static_cast<std::size_t>(kTrainPerLabel + i)]);
        }
    }
    return split;
}

std::map<RiskLabel, long> label_distribution(const std::vector<GoldLabelSet>& golds,
                                             RobDomain domain) {
    if (golds.empty()) throw EmptyInput();
    std::map<RiskLabel, long> counts{{RiskLabel::low, 0}, {RiskLabel::unclear, 0}, {RiskLabel::high, 0}};
    for (const auto& g : golds) counts[g.labels.at(domain)] += 1;
    return counts;
}

}  // namespace robforge
