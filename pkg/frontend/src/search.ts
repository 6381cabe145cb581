// Concept name lookup for the search box. Prefix matches rank above
// substring matches; ties break alphabetically so suggestion order is
// stable across calls.

export function conceptSearch(query: string, names: string[], limit = 10): string[] {
  const needle = query.trim().toLowerCase();
  if (needle === "") {
    return [];
  }
  const prefix: string[] = [];
  const substring: string[] = [];
  for (const name of names) {
    const hay = name.toLowerCase();
    if (hay.startsWith(needle)) {
      prefix.push(name);
    } else if (hay.includes(needle)) {
      substring.push(name);
    }
  }
  prefix.sort((a, b) => a.localeCompare(b));
  substring.sort((a, b) => a.localeCompare(b));
  return prefix.concat(substring).slice(0, limit);
}
