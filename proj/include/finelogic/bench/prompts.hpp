#pragma once

#include <map>
#include <string>
#include <string_view>

namespace finelogic::bench {

// Prompt templates. Placeholders are written {name}.

inline constexpr std::string_view kDirectReasoning = R"(Based on the provided facts, answer the question. Conclude with one of the markers: "__PROVED__" for proven, "__DISPROVED__" for disproven, or "__UNKNOWN__" if uncertain.
Facts:{facts}
Hypothesis:{hypothesis})";

inline constexpr std::string_view kCotReasoning = R"(Based on the provided facts, answer the question. Conclude with one of the markers: "__PROVED__" for proven, "__DISPROVED__" for disproven, or "__UNKNOWN__" if uncertain.
Facts:{facts}
Hypothesis:{hypothesis}
Let's analyze this step by step.)";

inline constexpr std::string_view kFewShotReasoning = R"(Based on the provided facts, answer the question. Conclude with one of the markers: "__PROVED__" for proven, "__DISPROVED__" for disproven, or "__UNKNOWN__" if uncertain.
Here are some examples of proofs for your reference:
[Start of example]
For example, for this question:
{example}
[End of example]
You can refer to the proof method of the above question, think step by step, and give the result of this question.
Facts:{facts}
Hypothesis:{hypothesis})";

inline constexpr std::string_view kExtractEntitiesPredicates = R"(You are a logic analysis expert. Please extract all entities and predicates from the following logical expression translations:
Translation content: {formula_translations}
facts_formula: {facts_formula}
facts: {facts}
Special Requirement: If any entity or predicate symbol appears in the facts_formula, but has NO direct definition in the Translation content, you MUST go to the facts section and locate the corresponding natural language description and extract it. Be extremely careful NOT to omit any such entities or predicates. Only skip if it is literally missing from both translation content and facts.
Task:
1. Identify all entities involved (e.g., this tablefork, this corsair) and assign variables to them (a, b, c, d...)
2. Identify all predicates (e.g., is a raised, is a collotype) and assign symbols (using the original symbols like A, B, C...)
Critical instructions:
- Only give full entity and predicate explanations if their definitions appear in the formula_translations or facts.
- Only include entities and predicates that explicitly appear in the provided translation content or facts.
- Do not invent, infer, or add any entities or predicates not directly mentioned in the translations or facts.
- Maintain the original variable identifiers (e.g., 'a' in A(a) corresponds to the first entity).
- Maintain the original predicate identifiers (e.g., 'A' in A(x) represents "x is a raised").
- If a symbol (like 'c', 'F', etc.) doesn't appear in the translations or facts, do not include it in your output.
Expected output format:
We define the entities involved:
- a: [Corresponding entity, e.g., "This tablefork"]
- b: [Corresponding entity, e.g., "This corsair"]...
We denote:
[Original predicate symbol](x): [Predicate description]
[Original predicate symbol](x): [Predicate description]...
Please provide only the requested definitions without any additional information or explanations.)";

inline constexpr std::string_view kExtractPredicatesOnly = R"(You are a logic analysis expert. Please extract all predicates from the following logical expression translations:
Translation content: {formula_translations}
facts_formula: {facts_formula}
facts: {facts}
Special Requirement: If any entity or predicate symbol appears in the facts_formula, but has NO direct definition in the Translation content, you MUST go to the facts section and locate the corresponding natural language description and extract it. Be extremely careful NOT to omit any such entities or predicates. Only skip if it is literally missing from both translation content and facts.
Task: Identify all predicates and translate each uppercase symbol directly.
Critical instructions:
- For each uppercase symbol in the facts_formula, provide a direct translation in the format: [SYMBOL]: xxx happened.
- **Do not omit any symbols that appear in facts_formula or translation content. If they appear, they must be translated.**
- Only include symbols that actually appear in the facts_formula or translation content.
- Do not invent or infer any entities or relationships not explicitly mentioned.
- If a predicate's meaning is clearly defined in the translations or facts, use that definition.
- Do not include any lowercase symbols or entity definitions as they are not relevant in this case.
- If some symbols appear in facts_formula but not in translation content, you can directly translate the entire formula expression containing those symbols rather than translating each symbol individually. For example, for an expression like ¬C→¬(F∧¬E), you don't need to separately translate E if it's not defined elsewhere.
Expected output format:
We define:
A: xxx happened.
B: xxx happened.
AB: xxx happened...
Please provide only the requested definitions without any additional information or explanations.)";

inline constexpr std::string_view kLogicProofTranslation = R"(You are a logic proof translator. Your task is to translate a logical proof sequence from symbolic notation into a clear, step-by-step explanation.
Given: 1. A proof sequence in symbolic form 2. Definitions of entities and predicates used in the proof 3. Logical formula translations
Task: Convert the symbolic proof into a concise, step-by-step explanation that a human can easily follow.
Proof sequence to translate: {proofs_sentence}
Conclusion: {conclusion}
Instructions for translation:
1. Split the proof at each semicolon (;) to identify individual steps.
2. For each step: First, write a brief, natural language explanation on its own line (e.g. "Assume for contradiction: [formula]" or "From [inputs], we derive:"). On the next line, write the step label and the logical formula as in the original proof (e.g. assump1: A(b), int2: ¬B(b), etc.). Do not put both the explanation and the formula on the same line. For assumptions, use "Assume for contradiction: [formula]" then write assumpX: [formula] on the following line. For a standard derived step, use "From [inputs], we derive:" then on the following line write intX: [formula]. For contradictions, use "Contradiction:" then on the following line write "⊥". For reductio ad absurdum, use "By reductio ad absurdum from [step number]:" then write the derived conclusion on the next line. Do not skip formula labels or step names. Write both the explanation and the labeled formula.
3. Maintain correct logical notation (such as ¬, ∧, ∨, →, ∃, ⊥, etc.).
4. In the final step, clearly relate the conclusion to the hypothesis, if appropriate.
5. The output should be only the formatted translation, with no additional commentary.
Output format:
Step 1: [Brief explanation]
[Formula derived]
Step 2: From [input], we derive:
[Formula derived]
Step 3: Assume for contradiction:
assumpX: [Formula derived]
...
{status_message_content}
Final conclusion: {conclusion}
The conclusion must use exactly two underscores before and after either PROVED or DISPROVED or UNKNOWN, with no additional spaces or characters. Translate the proof concisely but retain all logical information from the original proof sequence. Do not add any steps not present in the original, and do not skip any steps. Output the translation only, with no additional commentary.)";

inline constexpr std::string_view kLogicalProofGeneration = R"(Solve the following logical reasoning problem using formal symbolic logic and provide a step-by-step reasoning process.
Follow these steps precisely:
1. Define predicates to represent terms in the problem
2. Translate all facts and the hypothesis into formal logical expressions
3. Derive the conclusion through systematic reasoning
4. State the final conclusion
OUTPUT FORMAT:
Your answer should follow this format exactly:
- Begin with "Our problem-solving procedure begins by formalizing all given facts and the hypothesis into first-order logic using standardized predicate definitions."
- Then state "For the predicate, we denote:" followed by your predicate definitions
- Translate each fact into a formal logical expression
- Present your reasoning steps in numbered format (Step 1:, Step 2:, etc.)
- End with "Final conclusion: " followed by either "__PROVED__" or "__DISPROVED__"
IMPORTANT: The conclusion must use exactly two underscores before and after either PROVED or DISPROVED, with no additional spaces or characters.
Here is an example problem solution, You need to strictly follow the format like this:
Example Solution:
{fewshot_example}
Now, solve this problem: {question}
The answer should be: {label}
Provide only the solution with no additional commentary or preamble.)";

/// Replaces every {name} with its value. Throws std::invalid_argument for a
/// placeholder without a value.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace finelogic::bench
