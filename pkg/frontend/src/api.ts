/** SPARQL protocol client: one in-flight request per editor session. */

import type { EditorState, Format, ResponseInfo } from "./state.js";

export const FORMAT_PARAM: Record<Format, string> = {
  HTML: "html",
  XML: "xml",
  JSON: "json",
  CSV: "csv",
  TSV: "tsv",
};

export function buildRequestUrl(baseUrl: string, endpoint: string,
                                query: string, format: Format): string {
  const params = new URLSearchParams({ query, format: FORMAT_PARAM[format] });
  return `${baseUrl}${endpoint}?${params.toString()}`;
}

export async function submitQuery(baseUrl: string, state: EditorState,
                                  signal?: AbortSignal): Promise<ResponseInfo> {
  const url = buildRequestUrl(baseUrl, state.endpoint, state.query, state.format);
  const response = await fetch(url, { signal });
  const body = await response.text();
  return {
    status: response.status,
    mediaType: (response.headers.get("content-type") ?? "").split(";")[0],
    body,
  };
}
