import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: ["test/globalSetup.ts"],
    environment: "node",
    testTimeout: 180_000,
    hookTimeout: 180_000,
    // one file at a time: the live tests own the spawned lab service
    fileParallelism: false,
  },
});
