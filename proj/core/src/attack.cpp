#include "spotattack/attack.hpp"

#include <json.hpp>

#include "spotattack/parallel.hpp"

namespace spotattack {

FitnessFn make_spot_fitness(const Classifier& model, const CharImage& source,
                            const SpotTemplate& spot, std::string target_label) {
  const std::size_t target = model.labels().index_of(target_label);
  return [&model, &source, spot, target](Position p) {
    const Mask mask = rasterize_mask(spot.shape, p, source.dims());
    return model.predict(apply_spot(source, mask, spot.delta, spot.mode)).values[target];
  };
}

AttackOutcome targeted_attack(const AttackTask& task, const Classifier& model) {
  if (task.source_label == task.target_label) {
    throw InvalidArgument("targeted attack needs a target different from the source '" +
                          task.source_label + "'");
  }
  const LabelSet& labels = model.labels();
  const std::size_t target = labels.index_of(task.target_label);
  labels.index_of(task.source_label);

  const Prediction clean = classify(model, task.source_image);
  if (clean.label != task.source_label) {
    throw SourceMisclassified("clean image is classified as '" + clean.label + "', not '" +
                              task.source_label + "'");
  }

  const Region region = feasible_region(task.spot.shape, task.source_image.dims());
  AttackOutcome out;
  out.source_label = task.source_label;
  out.target_label = task.target_label;
  out.search = run_ga(make_spot_fitness(model, task.source_image, task.spot, task.target_label),
                      region, task.ga);
  out.mask = rasterize_mask(task.spot.shape, out.search.best_position, task.source_image.dims());
  out.adversarial_image = apply_spot(task.source_image, out.mask, task.spot.delta, task.spot.mode);

  const ClassProbs probs = model.predict(out.adversarial_image);
  const Prediction adv = label_of(probs, labels);
  out.predicted_label = adv.label;
  out.predicted_confidence = adv.confidence;
  out.target_confidence = probs.values[target];
  out.success = adv.label == task.target_label;
  out.untargeted_success = adv.label != task.source_label;
  return out;
}

std::size_t pick_best_outcome(const std::vector<AttackOutcome>& outcomes, const LabelSet& labels) {
  if (outcomes.empty()) throw EmptyList("no attack outcomes to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i) {
    const double ci = outcomes[i].target_confidence;
    const double cb = outcomes[best].target_confidence;
    if (ci > cb || (ci == cb && labels.index_of(outcomes[i].target_label) <
                                    labels.index_of(outcomes[best].target_label))) {
      best = i;
    }
  }
  return best;
}

TargetChoice best_target_for_source(const CharImage& source_image, const std::string& source_label,
                                    const std::optional<std::vector<std::string>>& candidates,
                                    const SpotTemplate& spot, const GaParams& ga,
                                    const Classifier& model, int workers) {
  const LabelSet& labels = model.labels();
  std::vector<std::string> targets;
  if (candidates) {
    for (const auto& c : *candidates) {
      labels.index_of(c);
      if (c == source_label) throw InvalidArgument("candidate targets must exclude the source label");
      targets.push_back(c);
    }
  } else {
    for (const auto& l : labels.names()) {
      if (l != source_label) targets.push_back(l);
    }
  }
  if (targets.empty()) throw EmptyList("no candidate target classes");

  std::vector<AttackOutcome> outcomes(targets.size());
  parallel_for(targets.size(), workers, [&](std::size_t i) {
    AttackTask task{source_image, source_label, targets[i], spot, ga};
    task.ga.seed = ga.seed ^ static_cast<std::uint64_t>(labels.index_of(targets[i]));
    outcomes[i] = targeted_attack(task, model);
  });
  const std::size_t best = pick_best_outcome(outcomes, labels);
  TargetChoice choice{targets[best], outcomes[best], {}};
  choice.all = std::move(outcomes);
  return choice;
}

PlateChoice select_plate_source(const std::vector<PlateCharacter>& characters,
                                const SpotTemplate& spot, const GaParams& ga,
                                const Classifier& model,
                                const std::optional<std::vector<std::string>>& candidates,
                                int workers) {
  std::optional<PlateChoice> best;
  for (std::size_t i = 0; i < characters.size(); ++i) {
    const auto& ch = characters[i];
    if (classify(model, ch.image).label != ch.label) continue;
    std::optional<std::vector<std::string>> cands = candidates;
    if (cands) std::erase(*cands, ch.label);
    TargetChoice t = best_target_for_source(ch.image, ch.label, cands, spot, ga, model, workers);
    if (!best || t.outcome.target_confidence > best->outcome.target_confidence) {
      best = PlateChoice{i, t.target_label, std::move(t.outcome)};
    }
  }
  if (!best) throw NoAttackableCharacter("every character is misclassified before any spot is added");
  return *best;
}

TransferResult evaluate_transfer(const AttackOutcome& outcome, const Classifier& other_model) {
  const ClassProbs probs = other_model.predict(outcome.adversarial_image);
  const Prediction p = label_of(probs, other_model.labels());
  TransferResult r;
  r.label = p.label;
  r.confidence = p.confidence;
  if (other_model.labels().contains(outcome.target_label)) {
    r.target_confidence = probs.values[other_model.labels().index_of(outcome.target_label)];
  }
  r.targeted_success = p.label == outcome.target_label;
  r.untargeted_success = p.label != outcome.source_label;
  return r;
}

std::string to_json(const AttackOutcome& o) {
  nlohmann::ordered_json j;
  j["source"] = o.source_label;
  j["target"] = o.target_label;
  j["best_a"] = o.search.best_position.a;
  j["best_b"] = o.search.best_position.b;
  j["best_fitness"] = o.search.best_fitness;
  j["generations"] = o.search.generations_run;
  j["queries"] = o.search.oracle_queries;
  j["history"] = o.search.history;
  j["predicted_label"] = o.predicted_label;
  j["predicted_confidence"] = o.predicted_confidence;
  j["target_confidence"] = o.target_confidence;
  j["success"] = o.success;
  j["untargeted_success"] = o.untargeted_success;
  return j.dump(2);
}

}  // namespace spotattack
