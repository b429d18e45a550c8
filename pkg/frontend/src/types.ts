// Wire types mirroring the session service responses. The cockpit never
// recomputes any of these numbers; it only rearranges them for display.

export interface ScenarioRow {
  project_id: string
  name: string
  votes: number
  cost: number
  funded: boolean
}

export interface ScenarioView {
  mes_budget: number
  rows: ScenarioRow[]
}

export interface Ledger {
  total_budget: number
  committed_mes_budget: number
  initial_remainder: number
  freed_total: number
  deliberation_remainder: number
}

export interface FrozenRow {
  project_id: string
  name: string
  cost: number
  original_cost: number
  price_q: string
}

export interface SessionSnapshot {
  session_id: string
  state: string
  total_budget: number
  committed_mes_budget: number | null
  ledger: Ledger
  frozen: FrozenRow[]
  vetoed: Array<{ project_id: string; cost: number; decided_by: string }>
  event_count: number
}

export interface ShiftRow {
  statement_id: string
  n_paired: number
  n_unpaired: number
  percent_changed: number
  polarisation_normalized_pre: number
  polarisation_normalized_post: number
  polarisation_ratio: number | null
  polarisation_ratio_undefined: boolean
  consensus_majority_pre: number
  consensus_majority_post: number
  consensus_inverse_std_pre: number
  consensus_inverse_std_post: number
  mean_pre: number
  mean_post: number
  mean_change: number
}

export interface ServiceError {
  error: string
  detail: string
}
