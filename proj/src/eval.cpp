#include "tcvar/eval.hpp"

#include "tcvar/io.hpp"

#include <json.hpp>

namespace tcvar {

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["corpus_name"] = corpus_name;
  j["total_nll"] = total_nll;
  j["token_count"] = token_count;
  j["sentence_count"] = sentence_count;
  j["perplexity"] = perplexity;
  j["unk_count"] = unk_count;
  j["unk_rate"] = unk_rate();
  auto topics = nlohmann::ordered_json::object();
  for (const auto& [topic, ts] : per_topic) {
    nlohmann::ordered_json t;
    t["mean_nll"] = ts.mean_nll;
    if (std::isnan(ts.mean_baselined_loss)) {
      t["mean_baselined_loss"] = nullptr;
    } else {
      t["mean_baselined_loss"] = ts.mean_baselined_loss;
    }
    t["count"] = ts.count;
    topics[std::to_string(topic)] = std::move(t);
  }
  j["per_topic"] = std::move(topics);
  return j.dump(2) + "\n";
}

std::string scatter_csv(const std::vector<ScatterRow>& rows) {
  std::string out = "sentence_index,source_label,nll_a,nll_b\n";
  for (const auto& r : rows) {
    out += std::to_string(r.sentence_index) + ',' + r.source_label + ',' + format_double(r.nll_a) + ',' +
           format_double(r.nll_b) + '\n';
  }
  return out;
}

} // namespace tcvar
