#pragma once

namespace setcover {

/// Slack for comparing a recall fraction with 1 - gamma in floating point.
inline constexpr double kRecallSlack = 1e-12;

/// recall >= 1 - gamma, counting the boundary as success.
inline bool meets_recall_target(double recall, double gamma) {
  return recall >= (1.0 - gamma) - kRecallSlack;
}

}  // namespace setcover
