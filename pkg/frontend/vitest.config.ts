import { defineConfig } from "vitest/config";

// The e2e suite waits on a spawned service process, so timeouts are wider
// than the defaults.
export default defineConfig({
  test: {
    testTimeout: 20_000,
    hookTimeout: 45_000,
  },
});
