import type { ShiftRow } from './types'

export interface MetricChip {
  label: string
  pre: number
  post: number
  undefined?: boolean
}

export interface SpectrumCard {
  statementId: string
  nPaired: number
  nUnpaired: number
  arrowFrom: number
  arrowTo: number
  delta: number
  chips: MetricChip[]
}

/**
 * One card per statement: the mean arrow spans pre -> post, and every
 * metric variant appears as a labeled chip. Both polarisation and both
 * consensus readings are always shown side by side.
 */
export function toCards(statements: ShiftRow[]): SpectrumCard[] {
  return statements.map((s) => ({
    statementId: s.statement_id,
    nPaired: s.n_paired,
    nUnpaired: s.n_unpaired,
    arrowFrom: s.mean_pre,
    arrowTo: s.mean_post,
    delta: s.mean_change,
    chips: [
      {
        label: 'polarisation (std/range)',
        pre: s.polarisation_normalized_pre,
        post: s.polarisation_normalized_post,
      },
      {
        label: 'polarisation (post/pre ratio)',
        pre: 1,
        post: s.polarisation_ratio ?? NaN,
        undefined: s.polarisation_ratio_undefined,
      },
      {
        label: 'consensus (majority share)',
        pre: s.consensus_majority_pre,
        post: s.consensus_majority_post,
      },
      {
        label: 'consensus (1/(1+std))',
        pre: s.consensus_inverse_std_pre,
        post: s.consensus_inverse_std_post,
      },
    ],
  }))
}
