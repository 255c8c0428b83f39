// Where the integration tests expect the spawned lab service.
export const LABD_PORT = 8977;
export const LABD_URL = `http://127.0.0.1:${LABD_PORT}`;
export const LABD_WS = `ws://127.0.0.1:${LABD_PORT}`;
