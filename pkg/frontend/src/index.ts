export { EnvHandle, GridcraftClient, RemoteError } from './client.js';
export type { ClientOptions } from './client.js';
export {
  DEFAULT_LEXICON,
  bleu,
  bleuScores,
  completionRate,
  keywordPr,
  rewardScore,
  successScore,
  tokenize,
} from './metrics.js';
export type { KeywordCategory, KeywordLexicon, KeywordPR } from './metrics.js';
export { POV_SHAPE, ZONE_CELLS, ZONE_SHAPE, parseGridLiteral, zoneAt } from './protocol.js';
export type {
  Action,
  ContinuousAction,
  DiscreteAction,
  EnvConfigOverrides,
  HumanAction,
  Mode,
  Observation,
  SpaceDescriptors,
  StepInfo,
  StepOutcome,
} from './protocol.js';
