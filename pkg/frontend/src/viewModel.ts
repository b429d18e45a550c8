import type { Ledger, ScenarioView, SessionSnapshot, ShiftRow } from './types'

/**
 * Single serializable view model: every view renders from this object
 * and nothing else, so the whole UI is golden-snapshot testable without
 * a browser. All numbers inside come verbatim from service responses.
 */
export interface ViewModel {
  snapshot: SessionSnapshot | null
  scenario: ScenarioView | null
  sliderBudget: number
  /** sequence number of the scenario response currently shown */
  scenarioSeq: number
  statements: ShiftRow[]
  banner: string | null
}

export function initialViewModel(): ViewModel {
  return {
    snapshot: null,
    scenario: null,
    sliderBudget: 0,
    scenarioSeq: 0,
    statements: [],
    banner: null,
  }
}

export function withSnapshot(vm: ViewModel, snapshot: SessionSnapshot): ViewModel {
  return { ...vm, snapshot, banner: null }
}

/**
 * Accept a scenario response only if it is newer than what is on
 * screen; stale responses from superseded slider positions are dropped.
 */
export function withScenario(vm: ViewModel, scenario: ScenarioView, seq: number): ViewModel {
  if (seq <= vm.scenarioSeq) return vm
  return { ...vm, scenario, scenarioSeq: seq, banner: null }
}

export function withStatements(vm: ViewModel, statements: ShiftRow[]): ViewModel {
  return { ...vm, statements, banner: null }
}

export function withBanner(vm: ViewModel, message: string): ViewModel {
  // last good view stays; only the banner changes
  return { ...vm, banner: message }
}

export function ledgerOf(vm: ViewModel): Ledger | null {
  return vm.snapshot ? vm.snapshot.ledger : null
}
