#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "binprobe/errors.hpp"
#include "binprobe/strutil.hpp"

namespace binprobe {

enum class Task { SummarizeSrc, SummarizeDec, NameRecovery };
enum class PromptVariant { Default, Augmented, AugmentedNoAnalysis };

struct PromptSpec {
  Task task = Task::SummarizeDec;
  PromptVariant variant = PromptVariant::Default;
  std::string dec_code;                // or source code for SummarizeSrc
  std::vector<std::string> contexts;   // ordered fragments, empty for Default
};

struct RenderedPrompt {
  std::string system;
  std::string user;
};

// Verbatim chat templates. "{}" is the code slot, "{source functions}" the
// context slot. These bytes are pinned by golden-file tests; do not reflow.

inline constexpr std::string_view kSystemSrcDeveloper =
    "You are an experienced C/C++ software developer.\n";

inline constexpr std::string_view kSystemReverseEngineer =
    "You are an experienced binary reverse engineer to understand decompiled C code that lacks symbol information.\n";

inline constexpr std::string_view kUserSrcSummarize =
    R"__(You are provided with the following function:

{}

First generate a brief step-by-step description of its functionality in the format:

Description: ...

Then generate a high-level summary of its functionality in the format:

Summary: The function ...

After that, generate a brief description of its general purpose in the format:

Purpose: The purpose of the function is to ...
)__";

inline constexpr std::string_view kUserDecSummarizeDefault =
    R"__(You are provided with the following decompiled function that is hardly human readable:

{}

First generate a brief step-by-step description of its functionality in the format:

Description: ...

Then try to generate a summary of it that can help human understand / inspect its original high-level source code functionality in the format:

Summary: The function ...

After that, inspect and generate a brief description of its general purpose in the format:

Purpose: The purpose of the function seems to ...
)__";

inline constexpr std::string_view kUserDecSummarizeAugmented =
    R"__(You are provided with the following decompiled function that is not human readable:

{}

First generate a brief step-by-step description of the functionality of the decompiled code in the format:

Description: ...

Then try to generate a summary of it that can help human understand / inspect its original high-level source code functionality in the format:

Summary: The function ...

After that, consider the following source functions (if any) that are potentially relevant to this decompiled function.

{source functions}

Analyze whether they are relevant to the decompiled function in the format:

Analysis: ...

Finally, based on the analysis, try to inspect and generate the general purpose of the decompiled function in the format:

Purpose: The purpose of the function seems to ...
)__";

inline constexpr std::string_view kUserNameRecoveryDefault =
    R"__(You have decompiled a function from an executable, which currently has a generic name like sub_xxx. The decompiled function code is as follows:

{}

Generate a more human-understandable function name for the decompiled code to replace the original sub_xxx in the format:

Function Name: function_name_goes_here
)__";

inline constexpr std::string_view kUserNameRecoveryAugmented =
    R"__(You have decompiled a function from an executable, which currently has a generic name like sub_xxx. The decompiled function code is as follows:

{}

Consider the following source functions (if any) that are potentially relevant to this decompiled function.

{source functions}

Analyze whether these source functions are relevant to the decompiled function in the format:

Analysis: ...

Then, based on the analysis, generate a more human-understandable function name for the decompiled code to replace the original sub_xxx in the format:

Function Name: function_name_goes_here
)__";

// Judge rubrics, also golden-pinned.

inline constexpr std::string_view kJudgeContextRelevance =
    R"__(A. Does the summary reflect relevant context (domain)? Answer the question in range 5(best) to 1(worst). Domain/context describes the purpose of a function. It is more of the general high-level domain (e.g., network, memory, CPS, physics, GUI, etc) rather than specific functionalities (e.g., sort, string comparison, memory allocation).

- For 5, the summary and the reference should describe the same domain/context.
- For 4, the domain of the summary and the reference should be similar and relevant, although may not be exactly the same. The summary domain may be a superset or subset of the reference. The summary domain may be closely related to the reference domain. The summary and reference may be two different perspectives of a same specific domain.
- For 3, the summary does not explicitly mention a specific context. It only contains low level operations. From the summary, one cannot deduce the high-level purpose of the decompiled function.
- For 2, the summary is slightly misleading. The summary domain is different and not relevant to the reference domain. However, it is implied by the choice of words in the summary, and is not explicitly mentioned.
- For 1, the summary is completely misleading. The summary domain is irrelevant to the reference domain, and it is explicitly mentioned in the summary.

Your output should first briefly comment the summary from the aforementioned perspectives. Do not allow the length of the responses to influence your evaluation. Be as objective as possible.
)__";

inline constexpr std::string_view kJudgeFunctionality =
    R"__(B. Does the summary reflect relevant functionality? Answer the question in range 5(best) to 1(worst). Functionality means the specific high-level behaviors performed in a function (e.g., sort, string comparison, decoding package, printing error messages).

- For 5, the functionality in the summary should be almost exactly the same to the reference.
- For 4, the functionalities in the summary are similar to the reference. It may be vague in details, but the overall functionality and purpose is correct.
- For 3, the summary does not specify functionality. It only repeats some low-level operations without high level abstractions.
- For 2, the summary specify relevant but inaccurate functionality. The functionality specified in the summary may be relevant to the reference summary, but they have significant differences.
- For 1, the summary contains irrelevant functionality. It is contains a totally different behavior with the reference.

Your output should first briefly comment the summary from the aforementioned perspectives. Do not allow the length of the responses to influence your evaluation. Be as objective as possible.
)__";

inline std::string system_prompt(Task task) {
  return std::string(task == Task::SummarizeSrc ? kSystemSrcDeveloper : kSystemReverseEngineer);
}

namespace detail {

/// The no-analysis ablation equals the augmented template with the
/// "Analyze whether ... Analysis: ..." block cut out.
inline std::string remove_analysis_block(std::string tpl) {
  auto begin = tpl.find("Analyze whether");
  auto marker = tpl.find("Analysis: ...", begin);
  if (begin == std::string::npos || marker == std::string::npos) return tpl;
  auto end = marker + std::string_view("Analysis: ...\n\n").size();
  tpl.erase(begin, end - begin);
  return tpl;
}

}  // namespace detail

/// The raw user template for a (task, variant) pair, slots unfilled.
inline std::string prompt_template(Task task, PromptVariant variant) {
  switch (task) {
    case Task::SummarizeSrc:
      return std::string(kUserSrcSummarize);
    case Task::SummarizeDec:
      if (variant == PromptVariant::Default) return std::string(kUserDecSummarizeDefault);
      if (variant == PromptVariant::Augmented) return std::string(kUserDecSummarizeAugmented);
      return detail::remove_analysis_block(std::string(kUserDecSummarizeAugmented));
    case Task::NameRecovery:
      if (variant == PromptVariant::Default) return std::string(kUserNameRecoveryDefault);
      if (variant == PromptVariant::Augmented) return std::string(kUserNameRecoveryAugmented);
      return detail::remove_analysis_block(std::string(kUserNameRecoveryAugmented));
  }
  throw ConfigError("unknown task");
}

/// Numbered context fragments for the "{source functions}" slot.
inline std::string render_contexts(const std::vector<std::string>& contexts) {
  std::string out;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (i) out += "\n\n";
    out += std::to_string(i + 1) + ". " + contexts[i];
  }
  return out;
}

inline RenderedPrompt build_prompt(const PromptSpec& spec) {
  if (spec.dec_code.empty()) throw EmptyInput("prompt requires non-empty code");
  if (spec.variant == PromptVariant::Default && !spec.contexts.empty()) {
    throw ConfigError("default prompt variant takes no contexts");
  }
  std::string user = prompt_template(spec.task, spec.variant);
  user = replace_first(std::move(user), "{}", spec.dec_code);
  user = replace_first(std::move(user), "{source functions}", render_contexts(spec.contexts));
  return {system_prompt(spec.task), std::move(user)};
}

}  // namespace binprobe
