#include "angina/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "angina/annotator.hpp"
#include "angina/error.hpp"
#include "angina/rng.hpp"
#include "angina/text_scan.hpp"

namespace angina {
namespace {

using L = Label3;
using S = SymptomKind;
using Phrases = std::vector<std::string>;

constexpr int kMaxAttempts = 64;

struct Person {
  std::string subject;     // "He"
  std::string possessive;  // "his"
  std::string noun;        // "man"
};

// Replaces {S} (subject), {s} (subject, lowercase) and {p} (possessive).
std::string fill(std::string_view tmpl, const Person& who) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      const char slot = tmpl[i + 1];
      if (slot == 'S') out += who.subject;
      else if (slot == 's') out += rules::ascii_lower(who.subject);
      else if (slot == 'p') out += who.possessive;
      else out.append(tmpl.substr(i, 3));
      i += 2;
      continue;
    }
    out += tmpl[i];
  }
  return out;
}

const Phrases kHistory{"hypertension",   "hyperlipidemia", "type 2 diabetes", "CAD s/p PCI",
                       "COPD",           "GERD",           "atrial fibrillation",
                       "obesity",        "tobacco use",    "chronic kidney disease",
                       "hypothyroidism", "osteoarthritis"};
const Phrases kVisit{"follow up", "an annual visit", "a medication refill", "evaluation",
                     "a new patient visit", "routine care"};

// Chest pain phrasing that does or does not also assert a substernal quality.
const Phrases kCoreSubsternal{"substernal chest pain",
                              "substernal chest pressure",
                              "retrosternal chest pain",
                              "central chest pain",
                              "mid chest discomfort",
                              "chest pressure",
                              "chest tightness",
                              "chest heaviness",
                              "left sided chest pain",
                              "chest pain radiating to the left arm",
                              "chest discomfort radiating to the left shoulder",
                              "precordial chest pain",
                              "pressure in {p} chest",
                              "heaviness in {p} chest",
                              "SSCP"};
const Phrases kCorePlain{"chest pain",          "chest discomfort",       "chest ache",
                         "chest pains",        "CP",                     "pain in {p} chest",
                         "discomfort in {p} chest", "right sided chest pain", "chest burning"};
const Phrases kCpVerbs{"{S} reports", "{S} complains of", "{S} endorses", "{S} describes",
                       "{S} has been having", "{S} notes"};

const Phrases kExertionPositive{"with exertion",
                                "with exercise",
                                "when walking up stairs",
                                "while climbing stairs",
                                "brought on by exertion",
                                "when walking uphill",
                                "after walking two blocks",
                                "with activity",
                                "while shoveling snow",
                                "while mowing the lawn",
                                "with yard work",
                                "with emotional stress",
                                "when upset",
                                "during arguments with {p} family"};
const Phrases kExertionNegativePlain{"at rest", "that occurs at rest", "while sitting",
                                     "at night", "when lying down"};
const Phrases kExertionNegativeNegated{"not related to exertion", "not with exertion",
                                       "but not with activity"};

const Phrases kReliefPositive{"relieved by rest",           "relieved with nitroglycerin",
                              "improves with rest",          "better with sitting down",
                              "resolves with rest",          "eased by stopping",
                              "which goes away with rest",   "relieved by SL NTG",
                              "and resolves after resting",  "relieved by nitro"};
const Phrases kReliefNegative{"not relieved by rest", "not relieved by nitroglycerin",
                              "with no relief with nitro", "which does not improve with rest"};
// Palliation voided by a long duration.
const Phrases kReliefLong{"relieved by rest after two hours", "relieved with rest after 3 hours",
                          "improves with rest over several hours"};

const Phrases kSubsternalDenial{"{S} denies radiation to the left arm.",
                                "It is not substernal.", "No substernal pressure.",
                                "{S} denies any retrosternal component."};

const Phrases kCpDenial{"{S} denies", "No", "{S} has not had", "Negative for", "{S} denies any",
                        "{S} is without"};
const Phrases kCpDenialPlain{"chest pain", "chest discomfort", "CP", "chest pains"};
const Phrases kCpDenialSubsternal{"substernal chest pain", "chest pressure", "chest tightness",
                                  "central chest pain"};
const Phrases kExertionDenied{"with exertion", "with activity", "when walking"};
const Phrases kReliefDenied{"relieved by rest", "that improves with rest"};

const Phrases kSobCore{"shortness of breath", "dyspnea", "being short of breath",
                       "getting winded", "trouble breathing"};
const Phrases kSobVerbs{"{S} reports", "{S} endorses", "{S} notes", "{S} complains of"};
const Phrases kDoeClause{"with exertion",  "when climbing stairs", "after walking one block",
                         "with activity", "on exertion",          "while walking to the mailbox"};
const Phrases kDoeDirect{"{S} endorses DOE.", "{S} reports dyspnea on exertion.",
                         "{S} notes exertional dyspnea.",
                         "{S} describes exertional shortness of breath."};
const Phrases kSobWithoutDoe{"{S} reports {sob}.", "{S} has occasional {sob}.",
                             "{S} reports {sob} at night.", "{S} endorses {sob} at times."};
const Phrases kSobNotDoe{"{S} reports shortness of breath at rest but denies dyspnea on exertion.",
                         "{S} has shortness of breath, but not with exertion.",
                         "{S} is short of breath when lying flat, but not with activity."};
const Phrases kSobDeniedWithDoe{"{S} denies shortness of breath with exertion.", "Denies DOE.",
                                "No dyspnea on exertion.",
                                "{S} denies getting winded when walking."};
const Phrases kSobDenied{"{S} denies shortness of breath.", "No SOB.", "{S} is without dyspnea.",
                         "Negative for shortness of breath.", "{S} denies trouble breathing."};

const Phrases kOnset{"Symptoms began {n} weeks ago.", "This started about {n} months ago.",
                     "{S} first noticed this {n} weeks ago."};
const Phrases kConflict{"Today {s} denies chest pain.", "{S} denies chest pain at this time.",
                        "Currently no chest pain."};

const Phrases kDistractors{
    "Blood pressure today is 132/78.",
    "{S} takes lisinopril and atorvastatin daily.",
    "{S} walks {p} dog most mornings.",
    "{S} quit smoking ten years ago.",
    "{S} drinks two cups of coffee a day.",
    "Weight is stable since the last visit.",
    "{S} reports good adherence to medications.",
    "{S} lives with {p} spouse and is independent in daily activities.",
    "Sleep has been poor because of knee pain.",
    "Last A1c was 7.2.",
    "{S} had a colonoscopy last year.",
    "Appetite is good and bowel habits are normal.",
    "{S} denies fevers or chills.",
    "No recent travel or sick contacts.",
    "{S} was seen in the emergency department last month for a fall.",
    "Home glucose readings range from 110 to 160.",
    "{S} is trying to lose weight with diet changes.",
    "{S} has mild ankle swelling in the evenings.",
    "Flu vaccine was given in October.",
    "{S} works part time as a mechanic.",
    "{S} reports occasional headaches relieved by acetaminophen.",
    "Knee pain is worse with walking and better with rest.",
    "{S} denies palpitations, dizziness, or syncope.",
    "{S} has a cough productive of white sputum.",
    "{S} is stressed about {p} finances.",
    "{S} would like to discuss a referral to physical therapy.",
};

const Phrases kTail{
    "{S} spent some time describing recent family events in detail.",
    "{S} talked about a grandchild who recently started college out of state.",
    "There was a long discussion about the home glucose meter and test strips.",
    "{S} brought a list of questions about insurance coverage for medications.",
    "{S} recounted a fishing trip with old friends last summer.",
    "Much of the visit covered diet, including fried foods and holiday meals.",
    "{S} described trouble with the pharmacy refilling prescriptions on time.",
    "{S} mentioned a neighbor who helps with groceries every other week.",
    "{S} reviewed recent lab results and asked about cholesterol numbers.",
    "{S} asked about a shingles vaccine and whether it is covered.",
    "{S} described volunteering at the community center on weekends.",
    "{S} reports that the television remote and phone are hard to use.",
    "Transportation to appointments has been arranged through the clinic van.",
    "{S} expressed interest in a cooking class offered at the hospital.",
};

struct NoteLabels {
  L cp, ss, ex, re, sob, doe;
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string chest_sentences(const NoteLabels& l, const Person& who, Rng& rng,
                            std::vector<std::string>& extra) {
  if (l.cp == L::Positive) {
    std::string s = fill(rng.pick(kCpVerbs), who) + " ";
    s += fill(rng.pick(l.ss == L::Positive ? kCoreSubsternal : kCorePlain), who);
    bool after_negation = false;
    if (l.ex == L::Positive) {
      s += " " + fill(rng.pick(kExertionPositive), who);
    } else if (l.ex == L::Negative) {
      if (rng.bernoulli(0.5)) {
        s += " " + rng.pick(kExertionNegativePlain);
      } else {
        s += ", " + rng.pick(kExertionNegativeNegated);
        after_negation = true;
      }
    }
    if (l.re != L::Absent || rng.bernoulli(0.08)) {
      const Phrases& options = l.re == L::Positive   ? kReliefPositive
                               : l.re == L::Negative ? kReliefNegative
                                                     : kReliefLong;
      s += after_negation ? " but " : ", ";
      s += rng.pick(options);
    }
    s += ".";
    if (l.ss == L::Negative) extra.push_back(fill(rng.pick(kSubsternalDenial), who));
    return s;
  }
  if (l.cp == L::Negative) {
    std::string s = fill(rng.pick(kCpDenial), who) + " ";
    s += rng.pick(l.ss == L::Negative ? kCpDenialSubsternal : kCpDenialPlain);
    if (l.ex == L::Negative) s += " " + rng.pick(kExertionDenied);
    if (l.re == L::Negative) s += (l.ex == L::Negative ? " or " : " ") + rng.pick(kReliefDenied);
    return s + ".";
  }
  return {};
}

std::string breath_sentence(const NoteLabels& l, const Person& who, Rng& rng) {
  auto with_core = [&](const std::string& tmpl) {
    std::string s = fill(tmpl, who);
    const auto at = s.find("{sob}");
    if (at != std::string::npos) s.replace(at, 5, rng.pick(kSobCore));
    return s;
  };
  if (l.sob == L::Positive) {
    if (l.doe == L::Positive) {
      if (rng.bernoulli(0.4)) return fill(rng.pick(kDoeDirect), who);
      return fill(rng.pick(kSobVerbs), who) + " " + rng.pick(kSobCore) + " " +
             fill(rng.pick(kDoeClause), who) + ".";
    }
    if (l.doe == L::Negative) return fill(rng.pick(kSobNotDoe), who);
    return with_core(rng.pick(kSobWithoutDoe));
  }
  if (l.sob == L::Negative)
    return fill(rng.pick(l.doe == L::Negative ? kSobDeniedWithDoe : kSobDenied), who);
  return {};
}

std::string compose(const NoteLabels& l, const GeneratorConfig& config, Rng& rng) {
  static const std::vector<Person> kPeople = {
      {"He", "his", "man"}, {"She", "her", "woman"}, {"The patient", "their", "veteran"}};
  const Person& who = rng.pick(kPeople);

  std::vector<std::string> body;
  std::vector<std::string> extra;
  if (std::string cp = chest_sentences(l, who, rng, extra); !cp.empty()) body.push_back(cp);
  if (l.cp == L::Positive && rng.bernoulli(0.5)) {
    std::string onset = fill(rng.pick(kOnset), who);
    onset.replace(onset.find("{n}"), 3, std::to_string(2 + rng.uniform_index(5)));
    extra.push_back(onset);
  }
  if (l.cp == L::Positive && rng.bernoulli(config.conflict_rate))
    extra.push_back(fill(rng.pick(kConflict), who));
  if (std::string sob = breath_sentence(l, who, rng); !sob.empty()) body.push_back(sob);
  for (int slot = 0; slot < 4; ++slot)
    if (rng.bernoulli(config.distractor_rate)) extra.push_back(fill(rng.pick(kDistractors), who));

  // Symptom sentences keep their relative order; the rest are interleaved.
  for (auto& sentence : extra) {
    const std::size_t at = rng.uniform_index(body.size() + 1);
    body.insert(body.begin() + static_cast<std::ptrdiff_t>(at), std::move(sentence));
  }

  const std::size_t first = rng.uniform_index(kHistory.size());
  const std::size_t second = (first + 1 + rng.uniform_index(kHistory.size() - 1)) % kHistory.size();
  const std::string history[] = {kHistory[first], kHistory[second]};
  std::string text = std::to_string(45 + rng.uniform_index(40)) + "-year-old " + who.noun +
                     " with a history of " + history[0] + " and " + history[1] +
                     " presents for " + rng.pick(kVisit) + ".";
  for (const auto& s : body) text += " " + capitalize(s);
  if (rng.bernoulli(config.long_note_rate)) {
    const std::size_t n = 80 + rng.uniform_index(40);
    for (std::size_t i = 0; i < n; ++i) text += " " + fill(rng.pick(kTail), who);
  }
  return text;
}

std::size_t expected_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

void check_rate(double rate, const char* what, SymptomKind s) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw ConfigError(std::string(what) + " rate for " + std::string(symptom_name(s)) +
                      " must be in [0, 1]");
}

// Parent of each characterization; parents map to themselves.
SymptomKind parent_of(SymptomKind s) {
  switch (s) {
    case S::SubsternalCP:
    case S::ExertionalCP:
    case S::RestReliefCP:
      return S::ChestPain;
    case S::DyspneaOnExertion:
      return S::ShortnessOfBreath;
    default:
      return s;
  }
}

std::vector<SymptomLabels> allocate_labels(const GeneratorConfig& config, Rng& rng) {
  const std::size_t n = config.n_notes;
  std::vector<SymptomLabels> labels(n);
  std::vector<std::size_t> order(n);

  for (SymptomKind parent : {S::ChestPain, S::ShortnessOfBreath}) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    const std::size_t pos = expected_count(config[parent].positive_rate, n);
    const std::size_t neg = expected_count(config[parent].negative_rate, n);
    for (std::size_t i = 0; i < pos + neg; ++i)
      labels[order[i]][parent] = i < pos ? L::Positive : L::Negative;
  }

  for (SymptomKind child : {S::SubsternalCP, S::ExertionalCP, S::RestReliefCP,
                            S::DyspneaOnExertion}) {
    const SymptomKind parent = parent_of(child);
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i][parent] == L::Positive) positives.push_back(i);
      if (labels[i][parent] != L::Absent) negatives.push_back(i);
    }
    const std::size_t pos = expected_count(config[child].positive_rate, n);
    const std::size_t neg = expected_count(config[child].negative_rate, n);
    if (pos > positives.size())
      throw ConfigError(std::string(symptom_name(child)) + " positives exceed " +
                        std::string(symptom_name(parent)) + " positives");
    rng.shuffle(std::span(positives));
    for (std::size_t i = 0; i < pos; ++i) labels[positives[i]][child] = L::Positive;

    std::erase_if(negatives, [&](std::size_t i) { return labels[i][child] == L::Positive; });
    if (neg > negatives.size())
      throw ConfigError(std::string(symptom_name(child)) +
                        " negatives exceed the notes that mention " +
                        std::string(symptom_name(parent)));
    rng.shuffle(std::span(negatives));
    for (std::size_t i = 0; i < neg; ++i) labels[negatives[i]][child] = L::Negative;
  }
  return labels;
}

std::string note_id(std::size_t i, std::size_t n) {
  std::string digits = std::to_string(i + 1);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
  return "note-" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

std::array<Prevalence, kNumSymptoms> GeneratorConfig::default_prevalence() {
  constexpr double kCohort = 459.0;
  std::array<Prevalence, kNumSymptoms> p{};
  auto set = [&](SymptomKind s, double pos, double neg) {
    p[index_of(s)] = {pos / kCohort, neg / kCohort};
  };
  set(S::ChestPain, 243, 108);
  set(S::SubsternalCP, 179, 9);
  set(S::ExertionalCP, 108, 47);
  set(S::RestReliefCP, 42, 15);
  set(S::ShortnessOfBreath, 205, 88);
  set(S::DyspneaOnExertion, 155, 15);
  return p;
}

void GeneratorConfig::validate() const {
  for (SymptomKind s : kAllSymptoms) {
    const Prevalence& p = (*this)[s];
    check_rate(p.positive_rate, "positive", s);
    check_rate(p.negative_rate, "negative", s);
    if (p.positive_rate + p.negative_rate > 1.0 + 1e-12)
      throw ConfigError("positive + negative rate for " + std::string(symptom_name(s)) +
                        " exceeds 1");
    const SymptomKind parent = parent_of(s);
    if (parent != s && p.positive_rate > (*this)[parent].positive_rate + 1e-12)
      throw ConfigError(std::string(symptom_name(s)) + " is more prevalent than " +
                        std::string(symptom_name(parent)));
  }
  for (double r : {distractor_rate, conflict_rate, long_note_rate})
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("generator rates must be in [0, 1]");
}

Corpus generate_synthetic(const GeneratorConfig& config, const rules::CueLexicon& lexicon) {
  config.validate();
  Rng label_rng(mix_seed(config.seed, 0));
  const std::vector<SymptomLabels> gold = allocate_labels(config, label_rng);

  std::vector<AnnotatedNote> notes;
  notes.reserve(config.n_notes);
  for (std::size_t i = 0; i < config.n_notes; ++i) {
    const SymptomLabels& g = gold[i];
    const NoteLabels l{g[S::ChestPain],         g[S::SubsternalCP],
                       g[S::ExertionalCP],      g[S::RestReliefCP],
                       g[S::ShortnessOfBreath], g[S::DyspneaOnExertion]};
    Rng rng(mix_seed(config.seed, i + 1));
    std::string text;
    int attempt = 0;
    for (; attempt < kMaxAttempts; ++attempt) {
      text = compose(l, config, rng);
      if (rules::label_note(text, lexicon) == g) break;
    }
    if (attempt == kMaxAttempts)
      throw PipelineError("generate", "no template reproduces the labels of " +
                                          note_id(i, config.n_notes) + ": " + text);
    notes.push_back({note_id(i, config.n_notes), std::move(text), g});
  }
  return Corpus(std::move(notes));
}

const std::vector<std::string>& distractor_sentences() { return kDistractors; }

}  // namespace angina
