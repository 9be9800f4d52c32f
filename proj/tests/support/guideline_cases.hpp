#pragma once

#include <string>
#include <vector>

#include "angina/symptom.hpp"

namespace angina::testing {

struct GuidelineCase {
  std::string text;
  SymptomKind symptom;
  Label3 expected;
};

// Annotation guideline examples: positive, negative and ambiguous.
inline const std::vector<GuidelineCase>& guideline_cases() {
  using enum SymptomKind;
  static const std::vector<GuidelineCase> cases{
    {"The patient has had two episodes of chest pain in the past month. Patient denies chest pain today.",
     ChestPain, Label3::Positive},
    {"chest pain with rest and exertion", ExertionalCP, Label3::Positive},
    {"chest pain relieved by rest or continuing to walk", RestReliefCP, Label3::Positive},
    {"right anterior chest pain", SubsternalCP, Label3::Absent},
    {"right anterior chest pain", ChestPain, Label3::Positive},
    {"sharp chest pain", ChestPain, Label3::Positive},
    {"dull chest ache", ChestPain, Label3::Positive},
    {"chest pressure", ChestPain, Label3::Positive},
    {"chest tightness", ChestPain, Label3::Positive},
    {"chest discomfort", ChestPain, Label3::Positive},
    {"chest heaviness", ChestPain, Label3::Positive},
    {"feels like an elephant sitting on his chest", ChestPain, Label3::Positive},
    {"burning in her chest", ChestPain, Label3::Positive},
    {"severe cp", ChestPain, Label3::Positive},
    {"sscp", ChestPain, Label3::Positive},
    {"denies chest pain", ChestPain, Label3::Negative},
    {"no cp", ChestPain, Label3::Negative},
    {"substernal chest pain", SubsternalCP, Label3::Positive},
    {"central chest pain", SubsternalCP, Label3::Positive},
    {"pain in the center of his chest", SubsternalCP, Label3::Positive},
    {"left sided chest pain", SubsternalCP, Label3::Positive},
    {"precordial chest pain", SubsternalCP, Label3::Positive},
    {"epigastric chest pain", SubsternalCP, Label3::Positive},
    {"chest pressure", SubsternalCP, Label3::Positive},
    {"chest pain radiating to the left arm", SubsternalCP, Label3::Positive},
    {"sscp", SubsternalCP, Label3::Positive},
    {"right sided chest pain", SubsternalCP, Label3::Absent},
    {"sharp chest pain", SubsternalCP, Label3::Absent},
    {"pain in his shoulder", ChestPain, Label3::Absent},
    {"chest pain when walking up stairs", ExertionalCP, Label3::Positive},
    {"chest pain while shoveling snow", ExertionalCP, Label3::Positive},
    {"chest pain when mowing the lawn", ExertionalCP, Label3::Positive},
    {"chest pain brought on by emotional stress", ExertionalCP, Label3::Positive},
    {"chest pain without exertion", ExertionalCP, Label3::Negative},
    {"chest pain w/out exertion", ExertionalCP, Label3::Negative},
    {"chest pain at rest", ExertionalCP, Label3::Negative},
    {"chest pain while laying down", ExertionalCP, Label3::Negative},
    {"chest pain at night", ExertionalCP, Label3::Negative},
    {"chest pain with standing", ExertionalCP, Label3::Absent},
    {"chest pain while washing the dishes", ExertionalCP, Label3::Absent},
    {"patient is anxious about her job. she reports chest pain.", ExertionalCP, Label3::Absent},
    {"walks daily without difficulty", ExertionalCP, Label3::Absent},
    {"chest pain relieved by rest", RestReliefCP, Label3::Positive},
    {"chest pain resolves with nitroglycerin", RestReliefCP, Label3::Positive},
    {"chest pain improves with sitting down", RestReliefCP, Label3::Positive},
    {"chest pain eased by taking a few breaths", RestReliefCP, Label3::Positive},
    {"chest pain relieved by rest after 2 hours", RestReliefCP, Label3::Absent},
    {"chest pain relieved by rest after 90 minutes", RestReliefCP, Label3::Absent},
    {"chest pain relieved by rest within 5 minutes", RestReliefCP, Label3::Positive},
    {"shortness of breath", ShortnessOfBreath, Label3::Positive},
    {"sob", ShortnessOfBreath, Label3::Positive},
    {"dyspnea", ShortnessOfBreath, Label3::Positive},
    {"trouble breathing", ShortnessOfBreath, Label3::Positive},
    {"no sob", ShortnessOfBreath, Label3::Negative},
    {"denies shortness of breath", ShortnessOfBreath, Label3::Negative},
    {"doe", DyspneaOnExertion, Label3::Positive},
    {"dyspnea on exertion", DyspneaOnExertion, Label3::Positive},
    {"sob when climbing stairs", DyspneaOnExertion, Label3::Positive},
    {"denies doe", DyspneaOnExertion, Label3::Negative},
    {"no sob with exertion", DyspneaOnExertion, Label3::Negative},
  };
  return cases;
}

}  // namespace angina::testing
