export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorName: string,
    public readonly detail: string,
    public readonly violations: string[] = [],
  ) {
    super(`${errorName} (${status}): ${detail}`);
    this.name = "ApiRequestError";
  }
}
