/** Editor state and its pure transitions (kept DOM-free for testability). */

import { exampleById } from "./examples.js";

export const FORMATS = ["HTML", "XML", "JSON", "CSV", "TSV"] as const;
export type Format = (typeof FORMATS)[number];

export interface ResponseInfo {
  status: number;
  mediaType: string;
  body: string;
}

export interface HistoryEntry {
  query: string;
  endpoint: string;
  timestamp: number;
}

export interface EditorState {
  endpoint: string;
  query: string;
  format: Format;
  lastResponse: ResponseInfo | null;
  lastError: string | null;
  history: HistoryEntry[];
}

export function initialState(): EditorState {
  return {
    endpoint: "/sparql/federated",
    query: "",
    format: "JSON",
    lastResponse: null,
    lastError: null,
    history: [],
  };
}

export function canSubmit(state: EditorState): boolean {
  return state.query.trim().length > 0;
}

export function setQuery(state: EditorState, query: string): EditorState {
  return { ...state, query };
}

export function setEndpoint(state: EditorState, endpoint: string): EditorState {
  return { ...state, endpoint };
}

export function setFormat(state: EditorState, format: Format): EditorState {
  return { ...state, format };
}

/** Replace the editor content with a preloaded example (endpoint preset too). */
export function loadExample(state: EditorState, id: string): EditorState {
  const example = exampleById(id);
  if (!example) {
    return state;
  }
  return { ...state, query: example.query, endpoint: example.endpoint };
}

/** Record a submission attempt in the session history (append-only). */
export function recordSubmission(state: EditorState, now: number): EditorState {
  const entry: HistoryEntry = {
    query: state.query,
    endpoint: state.endpoint,
    timestamp: now,
  };
  return { ...state, history: [...state.history, entry] };
}

/** Store a successful (2xx) response; the editor content is untouched. */
export function applyResponse(state: EditorState, response: ResponseInfo): EditorState {
  return { ...state, lastResponse: response, lastError: null };
}

/** Store a failure (HTTP error or network); query text must survive. */
export function applyFailure(state: EditorState, message: string,
                             response: ResponseInfo | null = null): EditorState {
  return { ...state, lastError: message, lastResponse: response };
}
