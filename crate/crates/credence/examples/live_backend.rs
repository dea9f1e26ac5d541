//! Configures the live chat-completions backend. Only sends a request
//! when the API key environment variable is set; otherwise it prints
//! the request payload that would go on the wire and exits.
//!
//! ```bash
//! # dry run
//! cargo run -p credence --example live_backend
//!
//! # live round trip (any chat-completions endpoint)
//! export CREDENCE_API_KEY=...
//! cargo run -p credence --example live_backend -- \
//!     https://api.together.xyz/v1/chat/completions meta-llama/Meta-Llama-3.1-8B-Instruct-Turbo
//! ```

use credence::client::{GenerationConfig, HttpBackend, Message};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let endpoint = args
        .next()
        .unwrap_or_else(|| "https://api.together.xyz/v1/chat/completions".to_string());
    let model = args.next().unwrap_or_else(|| "meta-llama/Meta-Llama-3.1-8B-Instruct-Turbo".into());

    let config = GenerationConfig::new(model, endpoint);
    println!("model:       {}", config.model_id);
    println!("endpoint:    {}", config.endpoint);
    println!("temperature: {}", config.temperature);
    println!("top_p:       {}", config.top_p);
    println!("max_tokens:  {}", config.max_tokens);
    println!("api key env: {}", config.api_key_env);
    println!("in flight:   {}", config.max_in_flight);
    println!();

    let conversation = vec![Message::user(
        "Question: Is the Atlantic Ocean larger than the Pacific Ocean?\n\
         Options:\nA. yes\nB. no\n\n\
         Answer the question, then report how confident you are that your answer is correct, \
         as an integer between 0 and 100.\n\
         Respond in exactly this format:\nAnswer: <option label>\nConfidence: <integer 0-100>",
    )];

    if std::env::var(&config.api_key_env).is_err() {
        println!("{} is not set; dry run only.", config.api_key_env);
        println!("request payload that would be sent:");
        let payload = serde_json::json!({
            "model": config.model_id,
            "messages": conversation
                .iter()
                .map(|m| serde_json::json!({"role": m.role.as_str(), "content": m.content}))
                .collect::<Vec<_>>(),
            "temperature": config.temperature,
            "top_p": config.top_p,
            "max_tokens": config.max_tokens,
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
        return Ok(());
    }

    let backend = HttpBackend::new(config)?.with_log_path("requests.jsonl")?;
    let text = backend.complete(&conversation)?;
    println!("assistant reply:\n{text}");
    println!("(request/response pair logged to requests.jsonl)");
    Ok(())
}
