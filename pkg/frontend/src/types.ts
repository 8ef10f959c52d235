/** Payload shapes of the HTTP API. The client renders these verbatim. */

export interface ResponseEntry {
  item_id: string;
  correct: number;
  selected_option?: string | null;
}

export interface DatasetSummary {
  dataset_id: string;
  n_students: number;
  n_items: number;
  n_kcs: number;
  n_records: number;
}

export interface DatasetDetail extends DatasetSummary {
  student_ids: string[];
  item_ids: string[];
  kc_ids: string[];
}

export interface ModelSummary {
  model_id: string;
  dataset_id: string;
  n_students: number;
  n_items: number;
  n_kcs: number;
}

export interface StudentSummary {
  student_id: string;
  answered: number;
  correct: number;
  accuracy: number | null;
}

export interface OverviewPayload {
  n_students: number;
  n_items: number;
  n_kcs: number;
  n_records: number;
  class_accuracy: number | null;
  student_summaries: StudentSummary[];
  kc_weights: Record<string, number>;
  kc_class_mastery: Record<string, number> | null;
}

export interface OptionCount {
  option: string;
  count: number;
}

export interface ItemStatsPayload {
  item_id: string;
  respondents: number;
  accuracy: number | null;
  difficulty_classical: number | null;
  discrimination_pb: number | null;
  option_counts: OptionCount[] | null;
  difficulty_model: Record<string, number> | null;
  discrimination_model: number | Record<string, number> | null;
}

export interface ItemsPayload {
  items: ItemStatsPayload[];
  error_patterns: {
    per_item: Record<string, OptionCount[]>;
    items_without_option_data: string[];
  };
}

export interface KCStatsPayload {
  kc_id: string;
  weight: number;
  item_count: number;
  class_mean_mastery: number;
  difficulty_distribution: Record<string, number>;
}

export interface KcsPayload {
  kcs: KCStatsPayload[];
}

export interface ItemGapPayload {
  item_id: string;
  difficulty: number | null;
  gap: number | null;
  exceeds_class_ability: boolean;
}

export interface ComparisonPayload {
  class_accuracy: number | null;
  item_gaps: ItemGapPayload[];
  class_mean_mastery: Record<string, number>;
  student_deltas: Record<string, Record<string, { mastery: number; delta: number }>>;
  kc_accuracy: Record<string, number | null>;
  kc_classwide_issue: Record<string, boolean>;
  thresholds: { exceeds_gap: number; low_accuracy: number };
}

export interface SuggestionPayload {
  scope: string;
  template_id: string;
  text: string;
  trigger: Record<string, unknown>;
}

export interface SuggestionsPayload {
  suggestions: SuggestionPayload[];
}

export interface ChainStepPayload {
  kc_id: string;
  mastery: number;
  band: string;
  conclusion: string;
  evidence: { item_id: string; correct: number }[];
}

export interface DiagnosePayload {
  mastery: Record<string, number>;
  steps_run: number;
  final_loss: number;
  reasoning_chain: ChainStepPayload[];
}

export interface ContrastivePayload {
  mastery_1: Record<string, number>;
  mastery_2: Record<string, number>;
  delta: Record<string, number>;
}

export interface CounterfactualPayload {
  y_prime: Record<string, number>;
  binary_pattern: Record<string, number>;
  mastery_used: Record<string, number>;
  threshold: number;
}

export type PanelView =
  | "overview"
  | "items"
  | "kcs"
  | "comparison"
  | "suggestions"
  | "diagnose"
  | "contrastive"
  | "counterfactual";
