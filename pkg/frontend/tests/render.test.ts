import { describe, expect, it } from "vitest";

import { bindingCount, renderResponse } from "../src/render.js";

const JSON_BODY = JSON.stringify({
  head: { vars: ["s", "v"] },
  results: { bindings: [
    { s: { type: "uri", value: "http://x.example/a" },
      v: { type: "literal", value: "21.5",
           datatype: "http://www.w3.org/2001/XMLSchema#double" } },
    { s: { type: "uri", value: "http://x.example/b" } },
  ] },
});

const XML_BODY = `<?xml version="1.0"?>
<sparql xmlns="http://www.w3.org/2005/sparql-results#">
  <head><variable name="s"/><variable name="v"/></head>
  <results>
    <result>
      <binding name="s"><uri>http://x.example/a</uri></binding>
      <binding name="v"><literal datatype="http://www.w3.org/2001/XMLSchema#double">21.5</literal></binding>
    </result>
    <result>
      <binding name="s"><uri>http://x.example/b&amp;c</uri></binding>
    </result>
  </results>
</sparql>`;

describe("JSON rendering", () => {
  it("maps bindings to table rows, empty cell for unbound", () => {
    const model = renderResponse("JSON", JSON_BODY);
    expect(model.kind).toBe("table");
    if (model.kind === "table") {
      expect(model.variables).toEqual(["s", "v"]);
      expect(model.rows).toEqual([
        ["http://x.example/a", "21.5"],
        ["http://x.example/b", ""],
      ]);
    }
    expect(bindingCount("JSON", JSON_BODY)).toBe(2);
  });
});

describe("XML rendering", () => {
  it("extracts variables, rows, and decodes entities", () => {
    const model = renderResponse("XML", XML_BODY);
    if (model.kind !== "table") throw new Error("expected table");
    expect(model.variables).toEqual(["s", "v"]);
    expect(model.rows).toEqual([
      ["http://x.example/a", "21.5"],
      ["http://x.example/b&c", ""],
    ]);
    expect(bindingCount("XML", XML_BODY)).toBe(2);
  });
});

describe("CSV rendering", () => {
  it("parses header and quoted fields", () => {
    const body = 's,v\r\nhttp://x.example/a,"say ""hi"", ok"\r\nhttp://x.example/b,\r\n';
    const model = renderResponse("CSV", body);
    if (model.kind !== "table") throw new Error("expected table");
    expect(model.variables).toEqual(["s", "v"]);
    expect(model.rows).toEqual([
      ["http://x.example/a", 'say "hi", ok'],
      ["http://x.example/b", ""],
    ]);
    expect(bindingCount("CSV", body)).toBe(2);
  });

  it("handles a header-only table", () => {
    const model = renderResponse("CSV", "s\r\n");
    if (model.kind !== "table") throw new Error("expected table");
    expect(model.variables).toEqual(["s"]);
    expect(model.rows).toEqual([]);
  });
});

describe("TSV rendering", () => {
  it("strips ? from headers and splits on tabs", () => {
    const body = "?s\t?v\n<http://x.example/a>\t\"21.5\"^^<dt>\n";
    const model = renderResponse("TSV", body);
    if (model.kind !== "table") throw new Error("expected table");
    expect(model.variables).toEqual(["s", "v"]);
    expect(model.rows).toEqual([["<http://x.example/a>", '"21.5"^^<dt>']]);
    expect(bindingCount("TSV", body)).toBe(1);
  });
});

describe("HTML rendering", () => {
  it("passes the document through and counts body rows", () => {
    const body = "<table><thead><tr><th>s</th></tr></thead>" +
      "<tbody><tr><td>a</td></tr><tr><td>b</td></tr></tbody></table>";
    const model = renderResponse("HTML", body);
    expect(model.kind).toBe("html");
    expect(bindingCount("HTML", body)).toBe(2);
  });
});
