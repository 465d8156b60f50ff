/** Turn raw response payloads into a display model (a bindings table or HTML). */

import type { Format } from "./state.js";

export interface TableModel {
  kind: "table";
  variables: string[];
  rows: string[][];
}

export interface HtmlModel {
  kind: "html";
  html: string;
}

export type RenderModel = TableModel | HtmlModel;

interface JsonTerm {
  type: string;
  value: string;
  datatype?: string;
  "xml:lang"?: string;
}

interface JsonResults {
  head: { vars: string[] };
  results: { bindings: Record<string, JsonTerm>[] };
}

function fromJson(body: string): TableModel {
  const doc = JSON.parse(body) as JsonResults;
  const variables = doc.head.vars;
  const rows = doc.results.bindings.map((binding) =>
    variables.map((name) => (binding[name] ? binding[name].value : "")));
  return { kind: "table", variables, rows };
}

/** Minimal SRX extraction; the hub's own XML output is regular enough. */
function fromXml(body: string): TableModel {
  const variables = [...body.matchAll(/<variable\s+name="([^"]*)"/g)].map((m) => m[1]);
  const rows: string[][] = [];
  for (const result of body.matchAll(/<result>([\s\S]*?)<\/result>/g)) {
    const bound = new Map<string, string>();
    const bindingRe =
      /<binding\s+name="([^"]*)">\s*<(uri|literal)[^>]*>([\s\S]*?)<\/\2>/g;
    for (const m of result[1].matchAll(bindingRe)) {
      bound.set(m[1], decodeXml(m[3]));
    }
    rows.push(variables.map((name) => bound.get(name) ?? ""));
  }
  return { kind: "table", variables, rows };
}

function decodeXml(text: string): string {
  return text
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&#13;/g, "\r")
    .replace(/&#10;/g, "\n")
    .replace(/&amp;/g, "&");
}

function parseCsvLine(line: string): string[] {
  const cells: string[] = [];
  let cell = "";
  let quoted = false;
  for (let i = 0; i < line.length; i += 1) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        cell += '"';
        i += 1;
      } else if (ch === '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch === '"' && cell === "") {
      quoted = true;
    } else if (ch === ",") {
      cells.push(cell);
      cell = "";
    } else {
      cell += ch;
    }
  }
  cells.push(cell);
  return cells;
}

function fromCsv(body: string): TableModel {
  const lines = body.split("\r\n").filter((line, index, all) =>
    index < all.length - 1 || line.length > 0);
  if (lines.length === 0) {
    return { kind: "table", variables: [], rows: [] };
  }
  const variables = parseCsvLine(lines[0]);
  return { kind: "table", variables, rows: lines.slice(1).map(parseCsvLine) };
}

function fromTsv(body: string): TableModel {
  const lines = body.split("\n").filter((line, index, all) =>
    index < all.length - 1 || line.length > 0);
  if (lines.length === 0) {
    return { kind: "table", variables: [], rows: [] };
  }
  const variables = lines[0].split("\t").map((v) => v.replace(/^\?/, ""));
  return { kind: "table", variables, rows: lines.slice(1).map((l) => l.split("\t")) };
}

export function renderResponse(format: Format, body: string): RenderModel {
  switch (format) {
    case "JSON":
      return fromJson(body);
    case "XML":
      return fromXml(body);
    case "CSV":
      return fromCsv(body);
    case "TSV":
      return fromTsv(body);
    case "HTML":
      return { kind: "html", html: body };
  }
}

/** Row count of the raw payload, independent of the table model. */
export function bindingCount(format: Format, body: string): number {
  switch (format) {
    case "JSON":
      return (JSON.parse(body) as JsonResults).results.bindings.length;
    case "XML":
      return [...body.matchAll(/<result>/g)].length;
    case "CSV":
      return fromCsv(body).rows.length;
    case "TSV":
      return fromTsv(body).rows.length;
    case "HTML": {
      const bodyRows = body.match(/<tbody>([\s\S]*?)<\/tbody>/);
      return bodyRows ? [...bodyRows[1].matchAll(/<tr>/g)].length : 0;
    }
  }
}
