// Copyright 2026 The coldroute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coldroute/error.hpp"

namespace coldroute {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::EncoderFailure: return "EncoderFailure";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::UninitializedEmbedding: return "UninitializedEmbedding";
    case ErrorCode::SummarizerFailure: return "SummarizerFailure";
    case ErrorCode::QueryNodeUpdateAttempt: return "QueryNodeUpdateAttempt";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::UnknownModelInInteractions: return "UnknownModelInInteractions";
    case ErrorCode::UnassignedQuery: return "UnassignedQuery";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::MissingReward: return "MissingReward";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::LeakedInteraction: return "LeakedInteraction";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace coldroute
